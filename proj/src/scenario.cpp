#include "kcsm/scenario.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace kcsm {

std::string ScenarioNode::label() const {
    switch (kind) {
        case NodeKind::Internet: return "Internet";
        case NodeKind::Assumed: return "{}";
        case NodeKind::Hosts: return hosts.to_string();
    }
    return "";
}

std::string ScenarioGraph::canonical() const {
    std::string out;
    for (const ScenarioNode& n : nodes) {
        switch (n.kind) {
            case NodeKind::Internet: out += "I"; break;
            case NodeKind::Assumed: out += "A[" + n.hosts.to_string() + "]"; break;
            case NodeKind::Hosts: out += "H[" + n.hosts.to_string() + "]"; break;
        }
        out += ";";
    }
    out += "/";
    for (const ScenarioEdge& e : edges) {
        out += std::to_string(e.tail) + ">" + std::to_string(e.head) + ":" + e.label.to_string() + ";";
    }
    return out;
}

namespace {

struct PathState {
    std::vector<uint32_t> edges;        // infection edge indices along the path
    std::vector<uint32_t> milestones;   // milestones reached, in order
    std::vector<HostSet> infected_at;   // infected set when each milestone was reached
    HostSet infected;
};

bool edge_chrono_less(const InfectionEdge& a, const InfectionEdge& b) {
    if (a.interval.earliest_us != b.interval.earliest_us)
        return a.interval.earliest_us < b.interval.earliest_us;
    return a.alert_ids < b.alert_ids;
}

/// Renders one emitted path (plus absorbed corroborating roots) into a
/// scenario graph: node 0 is the root label, every edge appends a fresh node
/// for its targets and hangs off the latest node covering its effective
/// sources.
ScenarioGraph render_scenario(const StageMachine& machine, const InfectionGraph& g,
                              const std::vector<uint32_t>& edge_indices, bool internet_root,
                              const HostSet& assumed_sources) {
    std::vector<uint32_t> ordered = edge_indices;
    std::sort(ordered.begin(), ordered.end(), [&](uint32_t a, uint32_t b) {
        return edge_chrono_less(g.edges()[a], g.edges()[b]);
    });

    ScenarioGraph s;
    if (internet_root) {
        s.nodes.push_back(ScenarioNode{NodeKind::Internet, {}});
    } else {
        s.nodes.push_back(ScenarioNode{NodeKind::Assumed, assumed_sources});
    }
    std::optional<uint32_t> internet_root_idx;
    if (internet_root) internet_root_idx = 0;

    HostSet infected = internet_root ? HostSet{} : assumed_sources;

    auto resolve_tail = [&](const HostSet& eff_src) -> uint32_t {
        for (size_t i = s.nodes.size(); i-- > 0;) {
            const ScenarioNode& n = s.nodes[i];
            if (n.kind == NodeKind::Internet) continue;
            if (n.hosts.contains_all(eff_src)) return static_cast<uint32_t>(i);
        }
        for (size_t i = s.nodes.size(); i-- > 0;) {
            const ScenarioNode& n = s.nodes[i];
            if (n.kind == NodeKind::Internet) continue;
            if (n.hosts.intersects(eff_src)) return static_cast<uint32_t>(i);
        }
        return 0;
    };

    for (uint32_t ei : ordered) {
        const InfectionEdge& e = g.edges()[ei];
        uint32_t tail;
        HostSet eff_src;
        if (e.external_src) {
            if (!internet_root_idx) {
                s.nodes.push_back(ScenarioNode{NodeKind::Internet, {}});
                internet_root_idx = static_cast<uint32_t>(s.nodes.size() - 1);
            }
            tail = *internet_root_idx;
            eff_src = e.src_hosts;
        } else {
            eff_src = infected.contains_all(e.src_hosts) ? e.src_hosts
                                                         : e.src_hosts.intersection(infected);
            if (eff_src.empty()) eff_src = e.src_hosts;   // assumed-root sources
            tail = resolve_tail(eff_src);
        }

        ScenarioNode head_node;
        if (e.external_dst) {
            head_node.kind = NodeKind::Internet;
        } else {
            head_node.kind = NodeKind::Hosts;
            head_node.hosts = e.dst_hosts;
        }
        s.nodes.push_back(std::move(head_node));
        uint32_t head = static_cast<uint32_t>(s.nodes.size() - 1);

        s.edges.push_back(ScenarioEdge{tail, head, e.label, e.alert_ids, eff_src, e.dst_hosts,
                                       e.interval});
        if (e.label.intersects(machine.infecting)) infected.merge(e.dst_hosts);
    }
    return s;
}

}  // namespace

std::vector<ScenarioGraph> extract_scenarios(const StageMachine& machine, const InfectionGraph& g,
                                             size_t cap, bool* truncated) {
    if (truncated) *truncated = false;
    std::vector<ScenarioGraph> out;
    if (g.edges().empty()) return out;

    // Component id per milestone, for the per-component scenario cap.
    std::vector<uint32_t> component(g.milestone_count());
    for (uint32_t i = 0; i < component.size(); ++i) component[i] = i;
    std::function<uint32_t(uint32_t)> find = [&](uint32_t x) {
        while (component[x] != x) {
            component[x] = component[component[x]];
            x = component[x];
        }
        return x;
    };
    for (const auto& e : g.edges()) {
        uint32_t a = find(e.tail), b = find(e.head);
        if (a != b) component[std::max(a, b)] = std::min(a, b);
    }
    std::map<uint32_t, size_t> emitted_per_component;

    std::vector<uint32_t> roots;
    for (uint32_t e = 0; e < g.edges().size(); ++e) {
        if (g.in_edges()[g.edges()[e].tail].empty()) roots.push_back(e);
    }
    std::sort(roots.begin(), roots.end(),
              [&](uint32_t a, uint32_t b) { return edge_chrono_less(g.edges()[a], g.edges()[b]); });

    for (uint32_t root : roots) {
        const InfectionEdge& r = g.edges()[root];
        size_t& emitted = emitted_per_component[find(r.tail)];

        PathState start;
        start.milestones.push_back(r.tail);
        if (!r.external_src) start.infected = r.src_hosts;   // assumed infected
        start.infected_at.push_back(start.infected);
        start.edges.push_back(root);
        if (r.label.intersects(machine.infecting)) start.infected.merge(r.dst_hosts);
        start.milestones.push_back(r.head);
        start.infected_at.push_back(start.infected);

        // Depth-first enumeration of maximal valid continuations.
        std::function<void(PathState&)> walk = [&](PathState& state) {
            if (emitted >= cap) {
                if (truncated) *truncated = true;
                return;
            }
            uint32_t at = state.milestones.back();
            std::vector<uint32_t> nexts;
            for (uint32_t ei : g.out_edges()[at]) {
                const InfectionEdge& e = g.edges()[ei];
                bool ok = e.external_src || e.src_hosts.intersects(state.infected);
                if (ok) nexts.push_back(ei);
            }
            std::sort(nexts.begin(), nexts.end(), [&](uint32_t a, uint32_t b) {
                return edge_chrono_less(g.edges()[a], g.edges()[b]);
            });
            if (nexts.empty()) {
                // Maximal path: absorb corroborating Internet-rooted edges
                // whose targets were already infected when the walk passed
                // their head milestone.
                std::vector<uint32_t> all = state.edges;
                for (uint32_t other : roots) {
                    if (other == state.edges.front()) continue;
                    const InfectionEdge& o = g.edges()[other];
                    if (!o.external_src) continue;
                    for (size_t m = 0; m < state.milestones.size(); ++m) {
                        if (state.milestones[m] == o.head &&
                            state.infected_at[m].contains_all(o.dst_hosts)) {
                            all.push_back(other);
                            break;
                        }
                    }
                }
                out.push_back(render_scenario(machine, g, all, r.external_src, r.src_hosts));
                ++emitted;
                return;
            }
            for (uint32_t ei : nexts) {
                if (emitted >= cap) {
                    if (truncated) *truncated = true;
                    return;
                }
                const InfectionEdge& e = g.edges()[ei];
                PathState next = state;
                next.edges.push_back(ei);
                if (e.label.intersects(machine.infecting)) next.infected.merge(e.dst_hosts);
                next.milestones.push_back(e.head);
                next.infected_at.push_back(next.infected);
                walk(next);
            }
        };
        walk(start);
    }
    return out;
}

namespace {

bool node_compatible(const ScenarioNode& a, const ScenarioNode& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == NodeKind::Internet) return true;
    return a.hosts == b.hosts;
}

struct Matcher {
    const ScenarioGraph& small;
    const ScenarioGraph& big;
    std::vector<std::vector<std::pair<uint32_t, StageSet>>> small_out;   // node -> (head, label)
    std::vector<std::vector<std::pair<uint32_t, StageSet>>> small_in;
    std::vector<int32_t> map;        // small node -> big node or -1
    std::vector<char> used;          // big node taken

    bool edge_in_big(uint32_t tail, uint32_t head, StageSet label) const {
        for (const ScenarioEdge& e : big.edges) {
            if (e.tail == tail && e.head == head && e.label == label) return true;
        }
        return false;
    }

    bool consistent(uint32_t s, uint32_t b) const {
        for (const auto& [head, label] : small_out[s]) {
            if (map[head] >= 0 && !edge_in_big(b, static_cast<uint32_t>(map[head]), label))
                return false;
        }
        for (const auto& [tail, label] : small_in[s]) {
            if (map[tail] >= 0 && !edge_in_big(static_cast<uint32_t>(map[tail]), b, label))
                return false;
        }
        return true;
    }

    bool search(size_t pos, const std::vector<uint32_t>& order) {
        if (pos == order.size()) return true;
        uint32_t s = order[pos];
        for (uint32_t b = 0; b < big.nodes.size(); ++b) {
            if (used[b] || !node_compatible(small.nodes[s], big.nodes[b])) continue;
            if (!consistent(s, b)) continue;
            map[s] = static_cast<int32_t>(b);
            used[b] = 1;
            if (search(pos + 1, order)) return true;
            map[s] = -1;
            used[b] = 0;
        }
        return false;
    }
};

}  // namespace

bool subgraph_isomorphic(const ScenarioGraph& small, const ScenarioGraph& big,
                         std::vector<uint32_t>* witness) {
    if (small.nodes.size() > big.nodes.size() || small.edges.size() > big.edges.size())
        return false;

    Matcher m{small, big, {}, {}, {}, {}};
    m.small_out.resize(small.nodes.size());
    m.small_in.resize(small.nodes.size());
    for (const ScenarioEdge& e : small.edges) {
        m.small_out[e.tail].push_back({e.head, e.label});
        m.small_in[e.head].push_back({e.tail, e.label});
    }
    m.map.assign(small.nodes.size(), -1);
    m.used.assign(big.nodes.size(), 0);

    // Most-constrained nodes first keeps the backtracking shallow.
    std::vector<uint32_t> order(small.nodes.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        size_t da = m.small_out[a].size() + m.small_in[a].size();
        size_t db = m.small_out[b].size() + m.small_in[b].size();
        if (da != db) return da > db;
        return a < b;
    });

    if (!m.search(0, order)) return false;
    if (witness) {
        witness->resize(small.nodes.size());
        for (size_t i = 0; i < small.nodes.size(); ++i)
            (*witness)[i] = static_cast<uint32_t>(m.map[i]);
    }
    return true;
}

ScenarioSet prune_scenarios(std::vector<ScenarioGraph> scenarios, ExecMode mode) {
    ScenarioSet out;
    out.total_extracted = scenarios.size();

    // Exact duplicates first.
    std::map<std::string, size_t> seen;
    std::vector<ScenarioGraph> unique;
    std::vector<std::string> canon;
    for (auto& s : scenarios) {
        std::string c = s.canonical();
        if (seen.emplace(c, unique.size()).second) {
            unique.push_back(std::move(s));
            canon.push_back(std::move(c));
        } else {
            ++out.exact_duplicates;
        }
    }

    // Larger graphs first; ties by canonical order.
    std::vector<size_t> order(unique.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (unique[a].edges.size() != unique[b].edges.size())
            return unique[a].edges.size() > unique[b].edges.size();
        if (unique[a].nodes.size() != unique[b].nodes.size())
            return unique[a].nodes.size() > unique[b].nodes.size();
        return canon[a] < canon[b];
    });

    for (size_t idx : order) {
        const ScenarioGraph& candidate = unique[idx];
        size_t found = out.scenarios.size();
        std::vector<uint32_t> found_witness;

        if (mode == ExecMode::Parallel && out.scenarios.size() > 1) {
            std::vector<char> hits(out.scenarios.size(), 0);
#pragma omp parallel for schedule(dynamic, 1)
            for (int64_t r = 0; r < static_cast<int64_t>(out.scenarios.size()); ++r) {
                if (subgraph_isomorphic(candidate, out.scenarios[static_cast<size_t>(r)], nullptr))
                    hits[static_cast<size_t>(r)] = 1;
            }
            for (size_t r = 0; r < hits.size(); ++r) {
                if (hits[r]) {
                    found = r;
                    subgraph_isomorphic(candidate, out.scenarios[r], &found_witness);
                    break;
                }
            }
        } else {
            for (size_t r = 0; r < out.scenarios.size(); ++r) {
                if (subgraph_isomorphic(candidate, out.scenarios[r], &found_witness)) {
                    found = r;
                    break;
                }
            }
        }

        if (found < out.scenarios.size()) {
            out.witnesses.push_back(PruneWitness{canon[idx], found, std::move(found_witness)});
        } else {
            out.scenarios.push_back(candidate);
        }
    }
    return out;
}

std::string volume_reduction_percent(uint64_t distinct_scenarios, uint64_t raw_alerts) {
    if (raw_alerts == 0) throw std::invalid_argument("volume reduction needs a non-zero alert count");
    // Percentage with two decimals, rounded half-up, in integer arithmetic.
    unsigned long long scaled = distinct_scenarios * 10000ull;
    unsigned long long hundredths = (scaled + raw_alerts / 2) / raw_alerts;
    std::string whole = std::to_string(hundredths / 100);
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac.insert(frac.begin(), '0');
    return whole + "." + frac;
}

}  // namespace kcsm
