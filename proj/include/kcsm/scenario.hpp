#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcsm/infection_graph.hpp"

namespace kcsm {

enum class NodeKind : uint8_t { Internet, Hosts, Assumed };

/// Scenario node: a set of involved internal hosts, the collapsed
/// "Internet" label, or the assumed-infected empty root of a campaign whose
/// initial infection produced no alert. Assumed nodes render as an empty
/// set; the sources they stand for are kept for replay checks.
struct ScenarioNode {
    NodeKind kind = NodeKind::Hosts;
    HostSet hosts;

    std::string label() const;   // "Internet", "{}", or the host list
};

struct ScenarioEdge {
    uint32_t tail = 0;
    uint32_t head = 0;
    StageSet label;
    std::vector<std::string> alert_ids;
    HostSet src_hosts;   // effective sources (narrowed to the infected set)
    HostSet dst_hosts;
    TimeInterval interval;
};

/// One potential campaign: a transitively valid walk through an infection
/// graph, with every traversed edge hanging off the node that infected (or
/// stands for) its sources. Weakly connected, acyclic, at least one edge.
struct ScenarioGraph {
    std::vector<ScenarioNode> nodes;
    std::vector<ScenarioEdge> edges;   // chronological

    /// Structure-only serialization (labels, kinds, host sets; no alert ids
    /// or timestamps). Equal strings = duplicate scenarios.
    std::string canonical() const;
};

/// Enumerates maximal transitively valid paths from each root edge of the
/// infection graph. Walking keeps an infected set: internal edge sources
/// must intersect it (the traversed sources are narrowed to the
/// intersection), infecting labels add the edge's targets. Internet-rooted
/// edges whose targets were already infected when the walk passed their head
/// milestone are absorbed as corroborating branches. At most `cap` scenarios
/// are emitted per weakly-connected component (deterministic truncation).
std::vector<ScenarioGraph> extract_scenarios(const StageMachine& machine, const InfectionGraph& g,
                                             size_t cap = 10000, bool* truncated = nullptr);

/// Witness for one pruned scenario: which retained scenario embeds it and
/// the node mapping that proves it.
struct PruneWitness {
    std::string pruned_canonical;
    size_t retained_index = 0;
    std::vector<uint32_t> node_map;   // pruned node -> retained node
};

struct ScenarioSet {
    std::vector<ScenarioGraph> scenarios;   // distinct, largest first
    size_t total_extracted = 0;
    size_t exact_duplicates = 0;
    std::vector<PruneWitness> witnesses;
    bool truncated = false;
};

/// Removes exact duplicates, then every scenario subgraph-isomorphic to a
/// retained one (larger graphs first, ties by canonical order).
ScenarioSet prune_scenarios(std::vector<ScenarioGraph> scenarios,
                            ExecMode mode = ExecMode::Parallel);

/// Directed labeled subgraph monomorphism: nodes compatible iff equal host
/// sets (or both Internet / both assumed-equal), edges iff equal stage sets.
bool subgraph_isomorphic(const ScenarioGraph& small, const ScenarioGraph& big,
                         std::vector<uint32_t>* witness = nullptr);

/// distinct / raw as a percentage rounded half-up to two decimals, e.g.
/// "5.04". Throws std::invalid_argument when raw_alerts is zero.
std::string volume_reduction_percent(uint64_t distinct_scenarios, uint64_t raw_alerts);

}  // namespace kcsm
