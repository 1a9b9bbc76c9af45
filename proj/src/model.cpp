#include "kcsm/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <set>
#include <stdexcept>

namespace kcsm {

namespace {

bool parse_octets(std::string_view text, uint32_t& out) {
    uint32_t value = 0;
    int octets = 0;
    size_t pos = 0;
    while (octets < 4) {
        if (pos >= text.size()) return false;
        uint32_t octet = 0;
        size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            octet = octet * 10 + static_cast<uint32_t>(text[pos] - '0');
            if (octet > 255) return false;
            ++pos;
        }
        if (pos == start || pos - start > 3) return false;
        value = (value << 8) | octet;
        ++octets;
        if (octets < 4) {
            if (pos >= text.size() || text[pos] != '.') return false;
            ++pos;
        }
    }
    if (pos != text.size()) return false;
    out = value;
    return true;
}

}  // namespace

std::optional<HostAddr> parse_host(std::string_view text) {
    uint32_t value = 0;
    if (!parse_octets(text, value)) return std::nullopt;
    return HostAddr{value};
}

std::string format_host(HostAddr addr) {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((addr.value >> shift) & 0xffu);
        if (shift > 0) out += '.';
    }
    return out;
}

HostSet::HostSet(std::vector<HostAddr> hosts) : hosts_(std::move(hosts)) {
    std::sort(hosts_.begin(), hosts_.end());
    hosts_.erase(std::unique(hosts_.begin(), hosts_.end()), hosts_.end());
}

void HostSet::insert(HostAddr h) {
    auto it = std::lower_bound(hosts_.begin(), hosts_.end(), h);
    if (it == hosts_.end() || !(*it == h)) hosts_.insert(it, h);
}

void HostSet::merge(const HostSet& other) {
    std::vector<HostAddr> merged;
    merged.reserve(hosts_.size() + other.hosts_.size());
    std::set_union(hosts_.begin(), hosts_.end(), other.hosts_.begin(), other.hosts_.end(),
                   std::back_inserter(merged));
    hosts_ = std::move(merged);
}

bool HostSet::contains(HostAddr h) const {
    return std::binary_search(hosts_.begin(), hosts_.end(), h);
}

bool HostSet::intersects(const HostSet& other) const {
    auto a = hosts_.begin();
    auto b = other.hosts_.begin();
    while (a != hosts_.end() && b != other.hosts_.end()) {
        if (*a == *b) return true;
        if (*a < *b) ++a; else ++b;
    }
    return false;
}

bool HostSet::contains_all(const HostSet& other) const {
    return std::includes(hosts_.begin(), hosts_.end(), other.hosts_.begin(), other.hosts_.end());
}

HostSet HostSet::intersection(const HostSet& other) const {
    HostSet out;
    std::set_intersection(hosts_.begin(), hosts_.end(), other.hosts_.begin(), other.hosts_.end(),
                          std::back_inserter(out.hosts_));
    return out;
}

std::string HostSet::to_string() const {
    std::string out;
    for (size_t i = 0; i < hosts_.size(); ++i) {
        if (i) out += ',';
        out += format_host(hosts_[i]);
    }
    return out;
}

TimeInterval TimeInterval::hull(TimeInterval a, TimeInterval b) {
    return TimeInterval{std::min(a.earliest_us, b.earliest_us), std::max(a.latest_us, b.latest_us)};
}

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool read_fixed_uint(std::string_view s, size_t pos, size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<int64_t> parse_rfc3339_us(std::string_view s) {
    unsigned year, month, day, hour, minute, second;
    if (!read_fixed_uint(s, 0, 4, year)) return std::nullopt;
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' '))
        return std::nullopt;
    if (!read_fixed_uint(s, 5, 2, month) || !read_fixed_uint(s, 8, 2, day)) return std::nullopt;
    if (s[13] != ':' || s[16] != ':') return std::nullopt;
    if (!read_fixed_uint(s, 11, 2, hour) || !read_fixed_uint(s, 14, 2, minute) ||
        !read_fixed_uint(s, 17, 2, second))
        return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        return std::nullopt;

    size_t pos = 19;
    int64_t micros = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        int64_t frac = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 6) {
                frac = frac * 10 + (s[pos] - '0');
                ++digits;
            }
            ++pos;
        }
        if (digits == 0) return std::nullopt;
        while (digits < 6) {
            frac *= 10;
            ++digits;
        }
        micros = frac;
    }

    int64_t offset_s = 0;
    if (pos >= s.size()) return std::nullopt;
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
        ++pos;
    } else if (c == '+' || c == '-') {
        unsigned oh, om;
        if (pos + 6 > s.size() || s[pos + 3] != ':') return std::nullopt;
        if (!read_fixed_uint(s, pos + 1, 2, oh) || !read_fixed_uint(s, pos + 4, 2, om))
            return std::nullopt;
        offset_s = static_cast<int64_t>(oh) * 3600 + om * 60;
        if (c == '-') offset_s = -offset_s;
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    int64_t days = days_from_civil(year, month, day);
    int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_s;
    return secs * 1000000 + micros;
}

std::string format_rfc3339_us(int64_t micros) {
    int64_t secs = micros / 1000000;
    int64_t frac = micros % 1000000;
    if (frac < 0) {
        frac += 1000000;
        secs -= 1;
    }
    int64_t days = secs / 86400;
    int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int64_t year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    char buf[40];
    int n;
    if (frac == 0) {
        n = snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                     static_cast<long long>(year), month, day,
                     static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                     static_cast<long long>(rem % 60));
    } else {
        n = snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ",
                     static_cast<long long>(year), month, day,
                     static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                     static_cast<long long>(rem % 60), static_cast<long long>(frac));
    }
    return std::string(buf, static_cast<size_t>(n));
}

std::optional<Cidr> parse_cidr(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto host = parse_host(text.substr(0, slash));
    if (!host) return std::nullopt;
    int prefix = 0;
    auto tail = text.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), prefix);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) return std::nullopt;
    if (prefix < 0 || prefix > 32) return std::nullopt;
    uint32_t mask = prefix == 0 ? 0 : (prefix == 32 ? 0xffffffffu : ~(0xffffffffu >> prefix));
    return Cidr{host->value & mask, prefix};
}

std::string format_cidr(const Cidr& c) {
    return format_host(HostAddr{c.base}) + "/" + std::to_string(c.prefix);
}

ZoneTopology ZoneTopology::create(std::vector<Zone> zones) {
    std::set<std::string> names;
    for (const auto& z : zones) {
        if (z.name.empty()) throw std::invalid_argument("zone name must not be empty");
        if (z.name == kExternalZone || z.name == "external")
            throw std::invalid_argument("zone name '" + z.name + "' is reserved for the external zone");
        if (!names.insert(z.name).second)
            throw std::invalid_argument("duplicate zone name '" + z.name + "'");
    }
    for (size_t i = 0; i < zones.size(); ++i) {
        for (size_t j = i + 1; j < zones.size(); ++j) {
            for (const auto& a : zones[i].cidrs) {
                for (const auto& b : zones[j].cidrs) {
                    if (a.overlaps(b)) {
                        throw std::invalid_argument("zones '" + zones[i].name + "' and '" +
                                                    zones[j].name + "' overlap: " + format_cidr(a) +
                                                    " vs " + format_cidr(b));
                    }
                }
            }
        }
    }
    ZoneTopology topo;
    topo.zones_ = std::move(zones);
    return topo;
}

std::string_view ZoneTopology::zone_of(HostAddr addr) const {
    for (const auto& z : zones_) {
        for (const auto& c : z.cidrs) {
            if (c.contains(addr)) return z.name;
        }
    }
    return kExternalZone;
}

std::string_view direction_class_name(DirectionClass c) {
    switch (c) {
        case DirectionClass::Inbound: return "inbound";
        case DirectionClass::Outbound: return "outbound";
        case DirectionClass::InternalSame: return "internal-same";
        case DirectionClass::InternalCross: return "internal-cross";
    }
    return "?";
}

std::optional<Direction> classify_direction(HostAddr src, HostAddr dst, const ZoneTopology& topo) {
    std::string_view src_zone = topo.zone_of(src);
    std::string_view dst_zone = topo.zone_of(dst);
    bool src_ext = src_zone == kExternalZone;
    bool dst_ext = dst_zone == kExternalZone;
    if (src_ext && dst_ext) return std::nullopt;
    DirectionClass cls;
    if (src_ext) cls = DirectionClass::Inbound;
    else if (dst_ext) cls = DirectionClass::Outbound;
    else if (src_zone == dst_zone) cls = DirectionClass::InternalSame;
    else cls = DirectionClass::InternalCross;
    return Direction{cls, std::string(src_zone), std::string(dst_zone)};
}

DirectionResult alert_direction(const Alert& a, const ZoneTopology& topo) {
    std::optional<Direction> common;
    bool any_pair = false;
    bool any_internal = false;
    for (HostAddr s : a.sources) {
        for (HostAddr t : a.targets) {
            if (s == t) continue;
            any_pair = true;
            auto dir = classify_direction(s, t, topo);
            if (!dir) continue;
            any_internal = true;
            if (!common) {
                common = dir;
            } else if (!(*common == *dir)) {
                return DirectionResult{DirectionStatus::Mixed, {}};
            }
        }
    }
    if (!any_pair) return DirectionResult{DirectionStatus::Degenerate, {}};
    if (!any_internal) return DirectionResult{DirectionStatus::ExternalOnly, {}};
    // A mix of external-only pairs and one real direction is still mixed: the
    // external pairs carry no stage information, but the host sets disagree.
    for (HostAddr s : a.sources) {
        for (HostAddr t : a.targets) {
            if (s == t) continue;
            if (!classify_direction(s, t, topo)) return DirectionResult{DirectionStatus::Mixed, {}};
        }
    }
    return DirectionResult{DirectionStatus::Ok, *common};
}

DirectionSplit split_by_direction(const Alert& a, const ZoneTopology& topo) {
    DirectionSplit out;
    auto quick = alert_direction(a, topo);
    if (quick.status == DirectionStatus::Ok) {
        out.alerts.push_back(a);
        return out;
    }
    if (quick.status == DirectionStatus::Degenerate) {
        out.degenerate = true;
        return out;
    }
    if (quick.status == DirectionStatus::ExternalOnly) {
        out.external_only = true;
        return out;
    }

    // Mixed: group host pairs by direction, one split alert per group.
    std::map<Direction, std::pair<HostSet, HostSet>> groups;
    for (HostAddr s : a.sources) {
        for (HostAddr t : a.targets) {
            if (s == t) continue;
            auto dir = classify_direction(s, t, topo);
            if (!dir) {
                ++out.dropped_external_pairs;
                continue;
            }
            auto& [srcs, dsts] = groups[*dir];
            srcs.insert(s);
            dsts.insert(t);
        }
    }
    size_t index = 1;
    for (const auto& [dir, hosts] : groups) {
        Alert part;
        part.id = a.id + "~" + std::to_string(index++);
        part.kind = a.kind;
        part.sources = hosts.first;
        part.targets = hosts.second;
        part.interval = a.interval;
        part.member_ids = a.member_ids;
        out.alerts.push_back(std::move(part));
    }
    return out;
}

}  // namespace kcsm
