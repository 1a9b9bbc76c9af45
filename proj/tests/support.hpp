#pragma once

// Shared test plumbing: a deterministic RNG and random alert generators used
// by the property suites.

#include <string>
#include <vector>

#include "kcsm/model.hpp"
#include "kcsm/stages.hpp"

namespace kcsm::test {

struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed ^ 0x6a09e667f3bcc908ull) {}
    uint64_t next() {
        state += 0x9E3779B97f4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return next() % n; }
    bool chance(uint64_t percent) { return below(100) < percent; }
};

inline ZoneTopology test_topology() {
    auto cidr = [](const char* t) { return *parse_cidr(t); };
    return ZoneTopology::create({{"Z1", {cidr("10.0.0.0/24")}},
                                 {"Z2", {cidr("10.0.1.0/24")}},
                                 {"Z3", {cidr("10.0.2.0/24")}}});
}

inline HostAddr internal_host(Rng& rng) {
    uint32_t zone = static_cast<uint32_t>(rng.below(3));
    uint32_t host = 2 + static_cast<uint32_t>(rng.below(6));
    return HostAddr{(10u << 24) | (zone << 8) | host};
}

inline HostAddr external_host(Rng& rng) {
    return HostAddr{(198u << 24) | (51u << 16) | (100u << 8) | (1 + static_cast<uint32_t>(rng.below(8)))};
}

/// Random alerts over small host pools: a mix of directions, a few
/// meta-alerts, microsecond timestamps over up to ten days.
inline std::vector<Alert> random_alerts(Rng& rng, size_t count) {
    std::vector<Alert> alerts;
    for (size_t i = 0; i < count; ++i) {
        Alert a;
        a.id = "a" + std::to_string(i);
        a.kind = "test";
        int dir = static_cast<int>(rng.below(4));
        auto add_distinct = [&](HostSet& set, HostAddr h) {
            if (!set.contains(h)) set.insert(h);
        };
        switch (dir) {
            case 0: {   // inbound, sometimes a sweep
                a.sources.insert(external_host(rng));
                size_t targets = rng.chance(25) ? 2 + rng.below(3) : 1;
                while (a.targets.size() < targets) add_distinct(a.targets, internal_host(rng));
                break;
            }
            case 1: {   // outbound
                a.sources.insert(internal_host(rng));
                a.targets.insert(external_host(rng));
                break;
            }
            default: {   // internal
                HostAddr s = internal_host(rng);
                a.sources.insert(s);
                HostAddr t = internal_host(rng);
                int guard = 0;
                while (t == s && guard++ < 32) t = internal_host(rng);
                if (t == s) t = HostAddr{s.value ^ 1u};
                a.targets.insert(t);
                break;
            }
        }
        int64_t at = static_cast<int64_t>(rng.below(10ull * 86400 * 1000000));
        a.interval = TimeInterval{at, at};
        if (a.sources.size() * a.targets.size() > 1) {
            for (size_t m = 1; m <= a.sources.size() * a.targets.size(); ++m)
                a.member_ids.push_back(a.id + "." + std::to_string(m));
        }
        alerts.push_back(std::move(a));
    }
    return alerts;
}

}  // namespace kcsm::test
