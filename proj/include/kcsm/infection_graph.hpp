#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kcsm/alert_graph.hpp"

namespace kcsm {

/// Aggregated stage evidence between two campaign milestones. All host and
/// alert data lives on edges; milestones are bare progress markers.
struct InfectionEdge {
    uint32_t tail = 0;
    uint32_t head = 0;
    StageSet label;
    HostSet src_hosts;
    HostSet dst_hosts;
    std::vector<std::string> alert_ids;   // sorted
    TimeInterval interval;                // hull of the member alerts
    bool external_src = false;            // all source hosts outside the monitored network
    bool external_dst = false;            // all target hosts outside the monitored network
};

/// Consolidated alert graph: milestones as nodes, merged alert evidence as
/// edges. Milestone ids are sequential integers assigned in topological
/// order, so identical inputs produce identical graphs.
class InfectionGraph {
public:
    InfectionGraph() = default;
    InfectionGraph(uint32_t milestones, std::vector<InfectionEdge> edges);

    uint32_t milestone_count() const { return milestones_; }
    const std::vector<InfectionEdge>& edges() const { return edges_; }

    const std::vector<std::vector<uint32_t>>& out_edges() const { return out_; }
    const std::vector<std::vector<uint32_t>>& in_edges() const { return in_; }

    /// Number of weakly-connected milestone components that carry at least
    /// one edge; this is what gets reported as the infection-graph count.
    size_t component_count() const;

private:
    uint32_t milestones_ = 0;
    std::vector<InfectionEdge> edges_;
    std::vector<std::vector<uint32_t>> out_;
    std::vector<std::vector<uint32_t>> in_;
};

/// Consolidates a shortcut-eliminated alert graph. Every linked alert
/// becomes one edge (label = its full stage set, hosts = its own sources and
/// targets); the linking structure dictates shared milestones. Edges with
/// identical labels merge when they fan out of one milestone with equal
/// sources (targets union) or fan into one milestone with equal targets
/// (sources union), repeated to fixpoint. Isolated alerts contribute no
/// edges.
InfectionGraph consolidate(const AlertGraph& g, ExecMode mode = ExecMode::Parallel);

}  // namespace kcsm
