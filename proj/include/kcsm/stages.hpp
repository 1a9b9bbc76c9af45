#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kcsm/model.hpp"

namespace kcsm {

/// The nine network-visible kill-chain stages. Enumerator order is the
/// canonical rendering order.
enum class AptStage : uint8_t { R, D1, D2, C, L, S, P, E, O };

inline constexpr size_t kStageCount = 9;
inline constexpr std::array<AptStage, kStageCount> kAllStages = {
    AptStage::R, AptStage::D1, AptStage::D2, AptStage::C, AptStage::L,
    AptStage::S, AptStage::P,  AptStage::E,  AptStage::O};

std::string_view stage_code(AptStage s);
std::string_view stage_name(AptStage s);
std::optional<AptStage> parse_stage(std::string_view code);

/// Set of stages as a bitmask over the nine codes. Equality is label
/// equality; rendering follows the canonical order R,D1,D2,C,L,S,P,E,O.
class StageSet {
public:
    constexpr StageSet() = default;
    constexpr StageSet(std::initializer_list<AptStage> stages) {
        for (AptStage s : stages) bits_ |= bit(s);
    }

    constexpr void add(AptStage s) { bits_ |= bit(s); }
    constexpr bool contains(AptStage s) const { return bits_ & bit(s); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr size_t size() const { return static_cast<size_t>(__builtin_popcount(bits_)); }

    constexpr StageSet intersect(StageSet other) const { return StageSet(bits_ & other.bits_); }
    constexpr StageSet unite(StageSet other) const { return StageSet(bits_ | other.bits_); }
    constexpr bool intersects(StageSet other) const { return (bits_ & other.bits_) != 0; }
    constexpr bool contains_all(StageSet other) const { return (bits_ & other.bits_) == other.bits_; }

    std::string to_string() const;   // e.g. "R,D1"
    uint16_t raw() const { return bits_; }

    friend constexpr bool operator==(StageSet a, StageSet b) { return a.bits_ == b.bits_; }
    friend constexpr bool operator<(StageSet a, StageSet b) { return a.bits_ < b.bits_; }

private:
    explicit constexpr StageSet(uint16_t bits) : bits_(bits) {}
    static constexpr uint16_t bit(AptStage s) { return static_cast<uint16_t>(1u << static_cast<unsigned>(s)); }
    uint16_t bits_ = 0;
};

/// Parses "R,D1" / "R D1" style stage lists.
std::optional<StageSet> parse_stage_set(std::string_view text);

/// Stage state machine: which stages compromise new hosts and which stage
/// may follow which. The successor relation is total over the nine stages
/// (an empty image is allowed).
struct StageMachine {
    StageSet infecting;
    std::array<StageSet, kStageCount> successors{};

    bool is_infecting(AptStage s) const { return infecting.contains(s); }
};

/// True iff s compromises new hosts under the default machine ({D1, L, P}).
bool is_infecting(AptStage s);

/// Potential stages implied by an alert's network direction:
/// inbound {R,D1}, outbound {D2,C,E}, internal same-zone {L,S,O},
/// internal cross-zone {L,S,P,O}.
StageSet assign_stages(DirectionClass d);
inline StageSet assign_stages(const Direction& d) { return assign_stages(d.cls); }

/// Built-in machine reduced to the network-visible stages: R leads to D1
/// only; infecting stages and the stages that loop in the infected state
/// succeed to all internal actions; S enables movement into the discovered
/// zone; E and O return through the goal state's backward transition.
StageMachine default_machine();

/// True iff v may directly follow u.
inline bool is_precondition(const StageMachine& m, AptStage u, AptStage v) {
    return m.successors[static_cast<size_t>(u)].contains(v);
}

/// Parses a machine definition document:
///   infecting: D1 L P
///   succ: R -> D1
///   succ: S -> L P S
/// Unlisted stages keep an empty successor image. Lines starting with '#'
/// and blank lines are ignored. Throws std::invalid_argument on bad input.
StageMachine parse_machine(std::string_view text);

}  // namespace kcsm
