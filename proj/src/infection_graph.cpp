#include "kcsm/infection_graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace kcsm {

namespace {

/// Plain union-find over alert connection points (pre/post of each node).
class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n) {
        for (size_t i = 0; i < n; ++i) parent_[i] = static_cast<uint32_t>(i);
    }
    uint32_t find(uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<uint32_t> parent_;
};

struct WorkEdge {
    uint32_t tail_point;
    uint32_t head_point;
    StageSet label;
    HostSet src;
    HostSet dst;
    std::vector<std::string> ids;
    TimeInterval interval;
    uint32_t key;        // canonical rank of the earliest member alert
    bool dead = false;
};

void merge_into(WorkEdge& keep, WorkEdge& gone, UnionFind& points, bool unify_heads) {
    if (unify_heads) {
        keep.dst.merge(gone.dst);
        points.unite(keep.head_point, gone.head_point);
    } else {
        keep.src.merge(gone.src);
        points.unite(keep.tail_point, gone.tail_point);
    }
    keep.ids.insert(keep.ids.end(), gone.ids.begin(), gone.ids.end());
    std::sort(keep.ids.begin(), keep.ids.end());
    keep.interval = TimeInterval::hull(keep.interval, gone.interval);
    keep.key = std::min(keep.key, gone.key);
    gone.dead = true;
}

// One merge sweep over a grouping side. side_of selects the shared milestone
// (tail for fan-out, head for fan-in); eq_hosts selects the host set that
// must match exactly on that side.
bool merge_sweep(std::vector<WorkEdge>& edges, UnionFind& points, bool fan_out) {
    std::map<std::pair<uint32_t, uint16_t>, std::vector<size_t>> groups;
    for (size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].dead) continue;
        uint32_t side = points.find(fan_out ? edges[i].tail_point : edges[i].head_point);
        groups[{side, edges[i].label.raw()}].push_back(i);
    }
    bool changed = false;
    for (auto& [key, members] : groups) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
            const HostSet& ha = fan_out ? edges[a].src : edges[a].dst;
            const HostSet& hb = fan_out ? edges[b].src : edges[b].dst;
            if (!(ha == hb)) return ha < hb;
            return edges[a].key < edges[b].key;
        });
        for (size_t i = 0; i + 1 < members.size();) {
            size_t a = members[i];
            size_t b = members[i + 1];
            const HostSet& ha = fan_out ? edges[a].src : edges[a].dst;
            const HostSet& hb = fan_out ? edges[b].src : edges[b].dst;
            if (ha == hb) {
                merge_into(edges[a], edges[b], points, fan_out);
                members.erase(members.begin() + static_cast<ptrdiff_t>(i) + 1);
                changed = true;
            } else {
                ++i;
            }
        }
    }
    return changed;
}

}  // namespace

InfectionGraph::InfectionGraph(uint32_t milestones, std::vector<InfectionEdge> edges)
    : milestones_(milestones), edges_(std::move(edges)), out_(milestones), in_(milestones) {
    for (uint32_t e = 0; e < edges_.size(); ++e) {
        out_[edges_[e].tail].push_back(e);
        in_[edges_[e].head].push_back(e);
    }
}

size_t InfectionGraph::component_count() const {
    if (milestones_ == 0) return 0;
    std::vector<uint32_t> parent(milestones_);
    for (uint32_t i = 0; i < milestones_; ++i) parent[i] = i;
    std::function<uint32_t(uint32_t)> find = [&](uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : edges_) {
        uint32_t a = find(e.tail), b = find(e.head);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::set<uint32_t> roots;
    for (const auto& e : edges_) roots.insert(find(e.tail));
    return roots.size();
}

InfectionGraph consolidate(const AlertGraph& g, ExecMode) {
    const size_t n = g.nodes().size();
    auto order = g.canonical_order();
    std::vector<uint32_t> rank(n);
    for (uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    // Connection points: pre(i) = 2*rank, post(i) = 2*rank + 1. Every alert
    // edge u->v welds post(u) to pre(v); those classes become milestones.
    UnionFind points(2 * n);
    std::vector<char> linked(n, 0);
    for (const AlertEdge& e : g.edges()) {
        points.unite(2 * rank[e.from] + 1, 2 * rank[e.to]);
        linked[e.from] = linked[e.to] = 1;
    }

    const StageSet inbound_stages = assign_stages(DirectionClass::Inbound);
    const StageSet outbound_stages = assign_stages(DirectionClass::Outbound);

    std::vector<WorkEdge> work;
    work.reserve(n);
    for (uint32_t r = 0; r < order.size(); ++r) {
        uint32_t node = order[r];
        if (!linked[node]) continue;   // isolated alerts keep their milestone pair, no edge
        const AlertNode& a = g.nodes()[node];
        work.push_back(WorkEdge{2 * r, 2 * r + 1, a.stages, a.sources, a.targets,
                                {a.alert_id}, a.interval, r});
    }

    // Aggregate matching evidence until nothing merges: same stage label and
    // either a shared tail milestone with equal sources (targets union) or a
    // shared head milestone with equal targets (sources union).
    bool changed = true;
    while (changed) {
        changed = merge_sweep(work, points, /*fan_out=*/true);
        changed = merge_sweep(work, points, /*fan_out=*/false) || changed;
    }

    // Milestone ids: sequential in a topological order of the milestone DAG,
    // ties broken by the earliest connection point in canonical alert order.
    std::map<uint32_t, uint32_t> class_key;   // uf class -> smallest point
    for (uint32_t p = 0; p < 2 * n; ++p) {
        uint32_t c = points.find(p);
        auto it = class_key.find(c);
        if (it == class_key.end()) class_key[c] = p;
    }
    std::map<uint32_t, std::vector<size_t>> outgoing;   // class -> work edge indices
    std::map<uint32_t, uint32_t> indegree;
    for (auto& [c, k] : class_key) indegree[c] = 0;
    for (size_t i = 0; i < work.size(); ++i) {
        if (work[i].dead) continue;
        outgoing[points.find(work[i].tail_point)].push_back(i);
        ++indegree[points.find(work[i].head_point)];
    }
    std::set<std::pair<uint32_t, uint32_t>> ready;   // (key, class)
    for (auto& [c, deg] : indegree) {
        if (deg == 0) ready.insert({class_key[c], c});
    }
    std::map<uint32_t, uint32_t> milestone_id;
    uint32_t next_id = 0;
    while (!ready.empty()) {
        auto [key, c] = *ready.begin();
        ready.erase(ready.begin());
        milestone_id[c] = next_id++;
        auto it = outgoing.find(c);
        if (it == outgoing.end()) continue;
        for (size_t i : it->second) {
            uint32_t head = points.find(work[i].head_point);
            if (--indegree[head] == 0) ready.insert({class_key[head], head});
        }
    }

    std::vector<InfectionEdge> edges;
    edges.reserve(work.size());
    std::vector<size_t> emit_order;
    for (size_t i = 0; i < work.size(); ++i) {
        if (!work[i].dead) emit_order.push_back(i);
    }
    std::sort(emit_order.begin(), emit_order.end(),
              [&](size_t a, size_t b) { return work[a].key < work[b].key; });
    for (size_t i : emit_order) {
        WorkEdge& w = work[i];
        InfectionEdge e;
        e.tail = milestone_id.at(points.find(w.tail_point));
        e.head = milestone_id.at(points.find(w.head_point));
        e.label = w.label;
        e.src_hosts = std::move(w.src);
        e.dst_hosts = std::move(w.dst);
        e.alert_ids = std::move(w.ids);
        e.interval = w.interval;
        // Stage sets are direction markers: inbound is the only direction
        // with external sources, outbound the only one with external targets.
        e.external_src = w.label == inbound_stages;
        e.external_dst = w.label == outbound_stages;
        edges.push_back(std::move(e));
    }
    return InfectionGraph(next_id, std::move(edges));
}

}  // namespace kcsm
