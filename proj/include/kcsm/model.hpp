#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kcsm {

/// IPv4 host address. IPv6 is rejected at parse time.
struct HostAddr {
    uint32_t value = 0;

    friend bool operator==(HostAddr a, HostAddr b) { return a.value == b.value; }
    friend bool operator<(HostAddr a, HostAddr b) { return a.value < b.value; }
};

// Dotted-quad parse/format. parse_host returns nullopt for anything that is
// not a plain IPv4 literal (including IPv6 and CIDR suffixes).
std::optional<HostAddr> parse_host(std::string_view text);
std::string format_host(HostAddr addr);

/// Sorted, duplicate-free set of hosts with the handful of set operations the
/// linking rules need. Kept as a flat vector: sets are small and iteration
/// order doubles as the canonical output order.
class HostSet {
public:
    HostSet() = default;
    explicit HostSet(std::vector<HostAddr> hosts);

    void insert(HostAddr h);
    void merge(const HostSet& other);

    bool contains(HostAddr h) const;
    bool intersects(const HostSet& other) const;
    bool contains_all(const HostSet& other) const;    // other subset of *this
    HostSet intersection(const HostSet& other) const;

    bool empty() const { return hosts_.empty(); }
    size_t size() const { return hosts_.size(); }
    auto begin() const { return hosts_.begin(); }
    auto end() const { return hosts_.end(); }
    const std::vector<HostAddr>& values() const { return hosts_; }

    std::string to_string() const;   // comma-joined dotted quads

    friend bool operator==(const HostSet& a, const HostSet& b) { return a.hosts_ == b.hosts_; }
    friend bool operator<(const HostSet& a, const HostSet& b) { return a.hosts_ < b.hosts_; }

private:
    std::vector<HostAddr> hosts_;
};

/// Half-open is wrong here: both ends are inclusive observation timestamps,
/// microseconds since the Unix epoch, UTC.
struct TimeInterval {
    int64_t earliest_us = 0;
    int64_t latest_us = 0;

    bool valid() const { return earliest_us <= latest_us; }
    static TimeInterval hull(TimeInterval a, TimeInterval b);

    friend bool operator==(TimeInterval a, TimeInterval b) {
        return a.earliest_us == b.earliest_us && a.latest_us == b.latest_us;
    }
};

// RFC 3339 timestamps ("2018-02-14T12:00:00Z", optional fraction and offset).
std::optional<int64_t> parse_rfc3339_us(std::string_view text);
std::string format_rfc3339_us(int64_t micros);

/// Atomic IDS finding or clustered meta-alert. Singletons have exactly one
/// source, one target and a zero-length interval; meta-alerts carry the ids
/// of their clustered members.
struct Alert {
    std::string id;
    std::string kind;
    HostSet sources;
    HostSet targets;
    TimeInterval interval;
    std::vector<std::string> member_ids;

    bool is_meta() const { return !member_ids.empty(); }
};

/// IPv4 CIDR block.
struct Cidr {
    uint32_t base = 0;   // already masked
    int prefix = 0;      // 0..32

    bool contains(HostAddr h) const {
        if (prefix == 0) return true;
        uint32_t mask = prefix == 32 ? 0xffffffffu : ~(0xffffffffu >> prefix);
        return (h.value & mask) == base;
    }
    bool overlaps(const Cidr& other) const {
        const Cidr& narrow = prefix >= other.prefix ? *this : other;
        const Cidr& wide = prefix >= other.prefix ? other : *this;
        return wide.contains(HostAddr{narrow.base});
    }
};

std::optional<Cidr> parse_cidr(std::string_view text);
std::string format_cidr(const Cidr& c);

inline constexpr std::string_view kExternalZone = "Z0";

/// Named network zones over disjoint CIDR sets. Anything matching no CIDR is
/// the implicit external zone Z0.
class ZoneTopology {
public:
    struct Zone {
        std::string name;
        std::vector<Cidr> cidrs;
    };

    // Throws std::invalid_argument on duplicate or reserved names and on
    // overlapping CIDRs across zones.
    static ZoneTopology create(std::vector<Zone> zones);

    const std::vector<Zone>& zones() const { return zones_; }

    /// Zone name for an address; "Z0" when no CIDR matches.
    std::string_view zone_of(HostAddr addr) const;

private:
    std::vector<Zone> zones_;
};

enum class DirectionClass : uint8_t { Inbound, Outbound, InternalSame, InternalCross };

std::string_view direction_class_name(DirectionClass c);

struct Direction {
    DirectionClass cls;
    std::string src_zone;
    std::string dst_zone;

    friend bool operator==(const Direction& a, const Direction& b) {
        return a.cls == b.cls && a.src_zone == b.src_zone && a.dst_zone == b.dst_zone;
    }
    friend bool operator<(const Direction& a, const Direction& b) {
        if (a.cls != b.cls) return a.cls < b.cls;
        if (a.src_zone != b.src_zone) return a.src_zone < b.src_zone;
        return a.dst_zone < b.dst_zone;
    }
};

/// Direction of a single host pair; nullopt when both endpoints are external
/// (the alert carries no stage information for the monitored network).
/// Callers must not pass src == dst.
std::optional<Direction> classify_direction(HostAddr src, HostAddr dst, const ZoneTopology& topo);

enum class DirectionStatus : uint8_t { Ok, Mixed, ExternalOnly, Degenerate };

struct DirectionResult {
    DirectionStatus status = DirectionStatus::Degenerate;
    Direction direction{};   // meaningful only when status == Ok
};

/// Common direction of all source x target pairs of an alert. Mixed when the
/// pairs span more than one (class, zone pair); ExternalOnly when every pair
/// is external-to-external; Degenerate when no pair remains after dropping
/// self-directed ones.
DirectionResult alert_direction(const Alert& a, const ZoneTopology& topo);

struct DirectionSplit {
    std::vector<Alert> alerts;       // one per direction group, original order by direction key
    bool external_only = false;      // whole alert was external-to-external
    bool degenerate = false;         // no usable host pair
    size_t dropped_external_pairs = 0;
};

/// Splits a mixed-direction meta-alert into per-direction alerts sharing the
/// original id plus a "~<n>" suffix. Single-direction alerts pass through
/// unchanged. External-only groups are dropped and counted.
DirectionSplit split_by_direction(const Alert& a, const ZoneTopology& topo);

}  // namespace kcsm
