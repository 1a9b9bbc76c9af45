#include "kcsm/alert_graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kcsm {

uint32_t AlertGraph::add_node(AlertNode node) {
    nodes_.push_back(std::move(node));
    return static_cast<uint32_t>(nodes_.size() - 1);
}

void AlertGraph::add_edges(std::vector<AlertEdge> edges) {
    edges_.insert(edges_.end(), edges.begin(), edges.end());
    std::sort(edges_.begin(), edges_.end(), [](const AlertEdge& a, const AlertEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
}

std::vector<uint32_t> AlertGraph::canonical_order() const {
    std::vector<uint32_t> order(nodes_.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [this](uint32_t a, uint32_t b) {
        const AlertNode& x = nodes_[a];
        const AlertNode& y = nodes_[b];
        if (x.interval.earliest_us != y.interval.earliest_us)
            return x.interval.earliest_us < y.interval.earliest_us;
        return x.alert_id < y.alert_id;
    });
    return order;
}

std::vector<std::vector<uint32_t>> AlertGraph::out_adjacency() const {
    std::vector<std::vector<uint32_t>> adj(nodes_.size());
    for (uint32_t e = 0; e < edges_.size(); ++e) adj[edges_[e].from].push_back(e);
    return adj;
}

std::vector<std::vector<uint32_t>> AlertGraph::in_adjacency() const {
    std::vector<std::vector<uint32_t>> adj(nodes_.size());
    for (uint32_t e = 0; e < edges_.size(); ++e) adj[edges_[e].to].push_back(e);
    return adj;
}

std::optional<StageSet> link_candidate(const StageMachine& machine, const AlertNode& u,
                                       const AlertNode& v) {
    // Condition 1: strictly earlier. Equal timestamps never link.
    if (!(u.interval.latest_us < v.interval.earliest_us)) return std::nullopt;

    // Conditions 2 + 3, evaluated per candidate stage of u.
    StageSet qualified;
    for (AptStage s : kAllStages) {
        if (!u.stages.contains(s)) continue;
        if (!machine.successors[static_cast<size_t>(s)].intersects(v.stages)) continue;
        bool ip_ok = machine.is_infecting(s) ? u.targets.intersects(v.sources)
                                             : u.sources.intersects(v.sources);
        if (ip_ok) qualified.add(s);
    }
    if (qualified.empty()) return std::nullopt;

    // Stages that compromise new hosts are preferred.
    StageSet infecting = qualified.intersect(machine.infecting);
    return infecting.empty() ? qualified : infecting;
}

namespace detail {

std::vector<AlertEdge> link_edges_serial(const StageMachine& machine,
                                         const std::vector<AlertNode>& nodes, size_t first_new) {
    std::vector<AlertEdge> edges;
    for (uint32_t u = 0; u < nodes.size(); ++u) {
        for (uint32_t v = 0; v < nodes.size(); ++v) {
            if (u == v) continue;
            if (u < first_new && v < first_new) continue;   // pair already linked
            if (auto label = link_candidate(machine, nodes[u], nodes[v]))
                edges.push_back(AlertEdge{u, v, *label});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const AlertEdge& a, const AlertEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    return edges;
}

std::vector<AlertEdge> link_edges_indexed(const StageMachine& machine,
                                          const std::vector<AlertNode>& nodes, size_t first_new,
                                          bool parallel) {
    // Condition 3 always requires one of v's sources to be a source or
    // target of u, so only pairs sharing such a host are ever evaluated.
    std::unordered_map<uint32_t, std::vector<uint32_t>> by_source;
    for (uint32_t v = 0; v < nodes.size(); ++v) {
        for (HostAddr h : nodes[v].sources) by_source[h.value].push_back(v);
    }

    std::vector<std::vector<AlertEdge>> per_node(nodes.size());
    auto link_from = [&](uint32_t u) {
        std::vector<uint32_t> candidates;
        auto collect = [&](HostAddr h) {
            auto it = by_source.find(h.value);
            if (it != by_source.end())
                candidates.insert(candidates.end(), it->second.begin(), it->second.end());
        };
        for (HostAddr h : nodes[u].sources) collect(h);
        for (HostAddr h : nodes[u].targets) collect(h);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (uint32_t v : candidates) {
            if (v == u) continue;
            if (u < first_new && v < first_new) continue;
            if (auto label = link_candidate(machine, nodes[u], nodes[v]))
                per_node[u].push_back(AlertEdge{u, v, *label});
        }
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (int64_t u = 0; u < static_cast<int64_t>(nodes.size()); ++u)
            link_from(static_cast<uint32_t>(u));
    } else {
        for (uint32_t u = 0; u < nodes.size(); ++u) link_from(u);
    }

    std::vector<AlertEdge> edges;
    for (auto& chunk : per_node) edges.insert(edges.end(), chunk.begin(), chunk.end());
    std::sort(edges.begin(), edges.end(), [](const AlertEdge& a, const AlertEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    return edges;
}

}  // namespace detail

void extend_alert_graph(AlertGraph& graph, const StageMachine& machine, const ZoneTopology& topo,
                        const std::vector<Alert>& alerts, BuildStats* stats, ExecMode mode) {
    size_t first_new = graph.nodes().size();
    for (const Alert& a : alerts) {
        auto dir = alert_direction(a, topo);
        if (dir.status != DirectionStatus::Ok) {
            if (stats) ++stats->dropped_external;
            continue;
        }
        graph.add_node(AlertNode{a.id, assign_stages(dir.direction), a.sources, a.targets, a.interval});
    }
    graph.add_edges(detail::link_edges_indexed(machine, graph.nodes(), first_new,
                                               mode == ExecMode::Parallel));
}

AlertGraph build_alert_graph(const StageMachine& machine, const ZoneTopology& topo,
                             const std::vector<Alert>& alerts, BuildStats* stats, ExecMode mode) {
    AlertGraph graph;
    extend_alert_graph(graph, machine, topo, alerts, stats, mode);
    return graph;
}

namespace {

/// Descendant bitsets over the DAG, indexed by node id.
class ReachBits {
public:
    ReachBits(size_t n) : words_((n + 63) / 64), bits_(n * words_, 0) {}

    void set(size_t node, size_t target) {
        bits_[node * words_ + target / 64] |= uint64_t{1} << (target % 64);
    }
    bool test(size_t node, size_t target) const {
        return bits_[node * words_ + target / 64] >> (target % 64) & 1;
    }
    void merge_into(size_t node, size_t from) {
        uint64_t* dst = &bits_[node * words_];
        const uint64_t* src = &bits_[from * words_];
        for (size_t w = 0; w < words_; ++w) dst[w] |= src[w];
    }
    const uint64_t* row(size_t node) const { return &bits_[node * words_]; }
    size_t words() const { return words_; }

private:
    size_t words_;
    std::vector<uint64_t> bits_;
};

}  // namespace

AlertGraph eliminate_shortcuts(const AlertGraph& g, ExecMode mode) {
    const size_t n = g.nodes().size();
    AlertGraph out;
    for (const AlertNode& node : g.nodes()) out.add_node(node);
    if (g.edges().empty()) return out;

    auto order = g.canonical_order();   // valid topological order
    auto out_adj = g.out_adjacency();

    ReachBits desc(n);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        uint32_t u = *it;
        for (uint32_t e : out_adj[u]) {
            uint32_t w = g.edges()[e].to;
            desc.set(u, w);
            desc.merge_into(u, w);
        }
    }

    // An edge u->v is a shortcut iff v is a strict descendant of one of u's
    // other successors, i.e. some path u->w~>v with length >= 2 exists.
    std::vector<char> keep(g.edges().size(), 1);
    auto filter_node = [&](uint32_t u) {
        if (out_adj[u].size() < 2) return;
        std::vector<uint64_t> via(desc.words(), 0);
        for (uint32_t e : out_adj[u]) {
            const uint64_t* row = desc.row(g.edges()[e].to);
            for (size_t w = 0; w < desc.words(); ++w) via[w] |= row[w];
        }
        for (uint32_t e : out_adj[u]) {
            uint32_t v = g.edges()[e].to;
            if (via[v / 64] >> (v % 64) & 1) keep[e] = 0;
        }
    };
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (int64_t u = 0; u < static_cast<int64_t>(n); ++u) filter_node(static_cast<uint32_t>(u));
    } else {
        for (uint32_t u = 0; u < n; ++u) filter_node(u);
    }

    std::vector<AlertEdge> kept;
    kept.reserve(g.edges().size());
    for (uint32_t e = 0; e < g.edges().size(); ++e) {
        if (keep[e]) kept.push_back(g.edges()[e]);
    }
    out.add_edges(std::move(kept));
    return out;
}

}  // namespace kcsm
