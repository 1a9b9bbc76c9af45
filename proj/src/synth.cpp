#include "kcsm/synth.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace kcsm {

namespace {

constexpr int64_t kDayUs = 86400ll * 1000000;
constexpr int64_t kNoonUs = 43200ll * 1000000;
constexpr int64_t kMinuteUs = 60ll * 1000000;

HostAddr host(std::string_view text) {
    auto h = parse_host(text);
    if (!h) throw std::invalid_argument("bad host literal: " + std::string(text));
    return *h;
}

Cidr cidr(std::string_view text) {
    auto c = parse_cidr(text);
    if (!c) throw std::invalid_argument("bad CIDR literal: " + std::string(text));
    return *c;
}

/// splitmix64; the standard distributions are not bit-stable across
/// compilers and fixtures must be.
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() {
        state += 0x9E3779B97f4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return next() % n; }
};

Alert point_alert(std::string id, std::string kind, HostSet sources, HostSet targets, int64_t at_us,
                  bool meta) {
    Alert a;
    a.id = std::move(id);
    a.kind = std::move(kind);
    a.sources = std::move(sources);
    a.targets = std::move(targets);
    a.interval = TimeInterval{at_us, at_us};
    if (meta) {
        size_t members = a.sources.size() * a.targets.size();
        for (size_t i = 1; i <= members; ++i) a.member_ids.push_back(a.id + "." + std::to_string(i));
    }
    return a;
}

}  // namespace

int64_t synth_base_us() {
    static const int64_t base = *parse_rfc3339_us("2018-02-14T00:00:00Z");
    return base;
}

ZoneTopology builtin_example_topology() {
    return ZoneTopology::create({{"Z1", {cidr("10.1.0.0/16")}}, {"Z2", {cidr("10.2.0.0/16")}}});
}

std::vector<Alert> builtin_example() {
    const int64_t base = synth_base_us();
    auto at = [&](int day, int step) { return base + (day - 1) * kDayUs + kNoonUs + step * kMinuteUs; };

    std::vector<Alert> alerts;
    alerts.push_back(point_alert(
        "recon", "portscan", HostSet({host("4.4.4.4")}),
        HostSet({host("10.1.0.1"), host("10.1.0.2"), host("10.1.0.3"), host("10.1.0.4")}),
        at(1, 0), true));
    alerts.push_back(point_alert("delivery", "exe_drop", HostSet({host("1.3.3.7")}),
                                 HostSet({host("10.1.0.4")}), at(2, 1), false));
    alerts.push_back(point_alert("download", "exe_download", HostSet({host("10.1.0.4")}),
                                 HostSet({host("1.4.4.7")}), at(3, 2), false));
    alerts.push_back(point_alert("pivot-1", "smb_pivot", HostSet({host("10.1.0.4")}),
                                 HostSet({host("10.2.0.1")}), at(4, 3), false));
    alerts.push_back(point_alert("pivot-2", "smb_pivot", HostSet({host("10.1.0.4")}),
                                 HostSet({host("10.2.0.3")}), at(4, 3), false));
    alerts.push_back(point_alert(
        "discovery", "portscan", HostSet({host("10.2.0.3")}),
        HostSet({host("10.2.0.2"), host("10.2.0.4"), host("10.2.0.5")}), at(5, 4), true));
    return alerts;
}

ZoneTopology builtin_ids2018_topology() {
    std::vector<ZoneTopology::Zone> zones;
    for (int i = 0; i < 6; ++i) {
        zones.push_back({"Z" + std::to_string(i + 1),
                         {cidr("172.31." + std::to_string(64 + i) + ".0/24")}});
    }
    return ZoneTopology::create(std::move(zones));
}

CampaignSpec builtin_ids2018_apt() {
    CampaignSpec spec;
    spec.steps = {
        {1, AptStage::D1, HostSet({host("1.1.13.37")}), HostSet({host("172.31.64.67")}), "smb_rce"},
        {1, AptStage::D2, HostSet({host("172.31.64.67")}), HostSet({host("12.34.12.34")}),
         "exe_download"},
        {4, AptStage::C, HostSet({host("172.31.64.67")}), HostSet({host("1.1.14.47")}), "cnc_beacon"},
        {8, AptStage::L, HostSet({host("172.31.64.67")}), HostSet({host("172.31.69.20")}),
         "smb_psexec"},
        {10, AptStage::E, HostSet({host("172.31.69.20")}), HostSet({host("1.1.15.57")}),
         "https_exfil"},
    };
    return spec;
}

namespace {

std::vector<Alert> campaign_alerts(const CampaignSpec& spec) {
    int prev_day = 1;
    std::vector<Alert> alerts;
    for (size_t i = 0; i < spec.steps.size(); ++i) {
        const CampaignStep& step = spec.steps[i];
        if (step.day < prev_day)
            throw std::invalid_argument("campaign days must be non-decreasing");
        if (step.sources.empty() || step.targets.empty())
            throw std::invalid_argument("campaign step " + std::to_string(i + 1) + " has empty hosts");
        prev_day = step.day;
        int64_t at = synth_base_us() + (step.day - 1) * kDayUs + kNoonUs +
                     static_cast<int64_t>(i) * kMinuteUs;
        std::string id = "gt:" + std::to_string(i + 1) + "-" + step.kind;
        bool meta = step.sources.size() * step.targets.size() > 1;
        alerts.push_back(point_alert(std::move(id), step.kind, step.sources, step.targets, at, meta));
    }
    return alerts;
}

const char* kInboundKinds[] = {"portscan", "exploit_attempt", "web_login_guessing"};
const char* kOutboundKinds[] = {"large_upload", "beacon", "stalled_http"};
const char* kInternalKinds[] = {"smb_transfer", "portscan", "rdp_session"};

}  // namespace

std::vector<Alert> generate_mixed(std::vector<Alert> campaign, const NoiseSpec& noise,
                                  const ZoneTopology& topo) {
    if (noise.alerts_per_day < 0 || noise.days < 0)
        throw std::invalid_argument("noise volume must not be negative");
    bool want_noise = noise.alerts_per_day > 0 && noise.days > 0;
    if (want_noise) {
        bool any_weight = false;
        for (int w : noise.direction_mix) {
            if (w < 0) throw std::invalid_argument("direction weights must not be negative");
            if (w > 0) any_weight = true;
        }
        if (!any_weight) throw std::invalid_argument("direction weights must not all be zero");
        if (noise.internal_hosts < 2 || noise.external_hosts < 1)
            throw std::invalid_argument("noise host pools too small");
    }

    HostSet reserved;
    for (const Alert& a : campaign) {
        reserved.merge(a.sources);
        reserved.merge(a.targets);
    }

    std::vector<Alert> alerts = std::move(campaign);
    if (want_noise) {
        // Internal pool: hosts spread round-robin over the configured zones,
        // skipping campaign hosts. Zones need room beyond .0/.1.
        std::vector<std::vector<HostAddr>> by_zone(topo.zones().size());
        {
            size_t made = 0;
            uint32_t offset = 2;
            while (made < static_cast<size_t>(noise.internal_hosts)) {
                bool progressed = false;
                for (size_t z = 0; z < topo.zones().size() && made < static_cast<size_t>(noise.internal_hosts); ++z) {
                    const Cidr& c = topo.zones()[z].cidrs.front();
                    uint32_t span = c.prefix >= 31 ? 0 : (1u << (32 - c.prefix)) - 2;
                    if (offset >= span) continue;
                    HostAddr h{c.base + offset};
                    progressed = true;
                    if (reserved.contains(h)) continue;
                    by_zone[z].push_back(h);
                    ++made;
                }
                ++offset;
                if (!progressed) throw std::invalid_argument("zones too small for the internal pool");
            }
        }
        std::vector<HostAddr> externals;
        {
            uint32_t base = host("198.18.0.0").value;
            uint32_t offset = 1;
            while (externals.size() < static_cast<size_t>(noise.external_hosts)) {
                HostAddr h{base + offset++};
                if (!reserved.contains(h) && topo.zone_of(h) == kExternalZone) externals.push_back(h);
            }
        }
        std::vector<size_t> usable_zones;
        for (size_t z = 0; z < by_zone.size(); ++z) {
            if (!by_zone[z].empty()) usable_zones.push_back(z);
        }
        bool any_pair_zone = false;
        for (size_t z : usable_zones) any_pair_zone |= by_zone[z].size() >= 2;
        if (noise.direction_mix[2] > 0 && !any_pair_zone)
            throw std::invalid_argument("same-zone noise needs a zone with at least two pool hosts");
        if (noise.direction_mix[3] > 0 && usable_zones.size() < 2)
            throw std::invalid_argument("cross-zone noise needs at least two zones with pool hosts");
        auto pick_internal = [&](Rng& rng) {
            size_t z = usable_zones[rng.below(usable_zones.size())];
            return std::pair<size_t, HostAddr>{z, by_zone[z][rng.below(by_zone[z].size())]};
        };

        Rng rng(noise.seed);
        int total_weight = noise.direction_mix[0] + noise.direction_mix[1] + noise.direction_mix[2] +
                           noise.direction_mix[3];
        size_t seq = 0;
        for (int day = 1; day <= noise.days; ++day) {
            int64_t day_start = synth_base_us() + (day - 1) * kDayUs;
            for (int k = 0; k < noise.alerts_per_day; ++k) {
                int pickw = static_cast<int>(rng.below(static_cast<uint64_t>(total_weight)));
                int dir = 0;
                for (; dir < 3; ++dir) {
                    if (pickw < noise.direction_mix[dir]) break;
                    pickw -= noise.direction_mix[dir];
                }
                int64_t at = day_start + static_cast<int64_t>(rng.below(kDayUs));
                HostAddr src, dst;
                const char* kind = "noise";
                switch (dir) {
                    case 0: {   // inbound
                        src = externals[rng.below(externals.size())];
                        dst = pick_internal(rng).second;
                        kind = kInboundKinds[rng.below(3)];
                        break;
                    }
                    case 1: {   // outbound
                        src = pick_internal(rng).second;
                        dst = externals[rng.below(externals.size())];
                        kind = kOutboundKinds[rng.below(3)];
                        break;
                    }
                    case 2: {   // internal, same zone
                        size_t z;
                        do {
                            z = usable_zones[rng.below(usable_zones.size())];
                        } while (by_zone[z].size() < 2);
                        src = by_zone[z][rng.below(by_zone[z].size())];
                        do {
                            dst = by_zone[z][rng.below(by_zone[z].size())];
                        } while (dst == src);
                        kind = kInternalKinds[rng.below(3)];
                        break;
                    }
                    default: {   // internal, cross zone
                        auto [za, a] = pick_internal(rng);
                        size_t zb;
                        HostAddr b;
                        do {
                            auto p = pick_internal(rng);
                            zb = p.first;
                            b = p.second;
                        } while (zb == za);
                        src = a;
                        dst = b;
                        kind = kInternalKinds[rng.below(3)];
                        break;
                    }
                }
                char id[16];
                snprintf(id, sizeof id, "n%06zu", ++seq);
                alerts.push_back(point_alert(id, kind, HostSet({src}), HostSet({dst}), at, false));
            }
        }
    }

    std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
        if (a.interval.earliest_us != b.interval.earliest_us)
            return a.interval.earliest_us < b.interval.earliest_us;
        return a.id < b.id;
    });
    return alerts;
}

std::vector<Alert> generate(const std::optional<CampaignSpec>& campaign, const NoiseSpec& noise,
                            const ZoneTopology& topo) {
    std::vector<Alert> seeds;
    if (campaign) seeds = campaign_alerts(*campaign);
    return generate_mixed(std::move(seeds), noise, topo);
}

CampaignSpec parse_campaign_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    CampaignSpec spec;
    spec.seed = doc.value("seed", 0ull);
    if (!doc.contains("steps") || !doc["steps"].is_array())
        throw std::invalid_argument("campaign document needs a 'steps' array");
    auto hosts_of = [](const nlohmann::json& v) {
        std::vector<HostAddr> hosts;
        if (v.is_string()) {
            hosts.push_back(host(v.get<std::string>()));
        } else if (v.is_array()) {
            for (const auto& h : v) hosts.push_back(host(h.get<std::string>()));
        } else {
            throw std::invalid_argument("host field must be a string or array");
        }
        return HostSet(std::move(hosts));
    };
    for (const auto& s : doc["steps"]) {
        CampaignStep step;
        step.day = s.at("day").get<int>();
        auto stage = parse_stage(s.at("stage").get<std::string>());
        if (!stage) throw std::invalid_argument("unknown stage in campaign step");
        step.stage_hint = *stage;
        step.sources = hosts_of(s.at("src"));
        step.targets = hosts_of(s.at("dst"));
        step.kind = s.value("kind", std::string("attack"));
        spec.steps.push_back(std::move(step));
    }
    if (spec.steps.empty()) throw std::invalid_argument("campaign document has no steps");
    return spec;
}

}  // namespace kcsm
