#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcsm/model.hpp"
#include "kcsm/stages.hpp"

namespace kcsm {

/// One (split) alert with its assigned stage set.
struct AlertNode {
    std::string alert_id;
    StageSet stages;
    HostSet sources;
    HostSet targets;
    TimeInterval interval;
};

struct AlertEdge {
    uint32_t from = 0;
    uint32_t to = 0;
    StageSet label;
};

/// Directed acyclic graph over alerts. Edges always point forward in time
/// (strict interval ordering), so any node order is a valid topological
/// order once sorted by (interval.earliest, alert_id).
class AlertGraph {
public:
    const std::vector<AlertNode>& nodes() const { return nodes_; }
    const std::vector<AlertEdge>& edges() const { return edges_; }

    uint32_t add_node(AlertNode node);
    void add_edges(std::vector<AlertEdge> edges);   // keeps edge list sorted by (from, to)

    /// Node indices sorted by (interval.earliest, alert_id); the canonical
    /// iteration order for everything downstream.
    std::vector<uint32_t> canonical_order() const;

    std::vector<std::vector<uint32_t>> out_adjacency() const;
    std::vector<std::vector<uint32_t>> in_adjacency() const;

private:
    std::vector<AlertNode> nodes_;
    std::vector<AlertEdge> edges_;
};

enum class ExecMode { Serial, Parallel };

/// Edge label for the ordered pair (u, v), or nullopt when the linking
/// conditions fail. The label is the set of u's stages that precondition
/// some stage of v and whose host rule holds (target-of-u meets source-of-v
/// for infecting stages, shared source otherwise); infecting stages are
/// preferred when present.
std::optional<StageSet> link_candidate(const StageMachine& machine, const AlertNode& u,
                                       const AlertNode& v);

struct BuildStats {
    size_t dropped_external = 0;   // alerts without a usable direction, skipped
};

/// Builds the graph for a batch of (direction-split) alerts.
AlertGraph build_alert_graph(const StageMachine& machine, const ZoneTopology& topo,
                             const std::vector<Alert>& alerts, BuildStats* stats = nullptr,
                             ExecMode mode = ExecMode::Parallel);

/// Appends a new batch to an existing graph: nodes for the new alerts plus
/// all edges ending in them. Existing nodes and edges are never touched.
void extend_alert_graph(AlertGraph& graph, const StageMachine& machine, const ZoneTopology& topo,
                        const std::vector<Alert>& alerts, BuildStats* stats = nullptr,
                        ExecMode mode = ExecMode::Parallel);

/// Removes every direct edge u->v for which a longer directed path u~>v
/// exists; ties between equal-length longest paths are kept. Nodes are
/// retained. The input must be a DAG (alert graphs always are).
AlertGraph eliminate_shortcuts(const AlertGraph& g, ExecMode mode = ExecMode::Parallel);

namespace detail {
/// Reference pairwise linker: plain double loop over all ordered pairs, no
/// host index. Kept for tests and the benchmark; must produce exactly the
/// same edge set as the indexed kernel.
std::vector<AlertEdge> link_edges_serial(const StageMachine& machine,
                                         const std::vector<AlertNode>& nodes, size_t first_new);
std::vector<AlertEdge> link_edges_indexed(const StageMachine& machine,
                                          const std::vector<AlertNode>& nodes, size_t first_new,
                                          bool parallel);
}  // namespace detail

}  // namespace kcsm
