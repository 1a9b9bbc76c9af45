#include "kcsm/export.hpp"

#include <stdexcept>

namespace kcsm {

namespace {

ordered_json host_set_json(const HostSet& hosts) {
    ordered_json arr = ordered_json::array();
    for (HostAddr h : hosts) arr.push_back(format_host(h));
    return arr;
}

ordered_json stage_set_json(StageSet stages) {
    ordered_json arr = ordered_json::array();
    for (AptStage s : kAllStages) {
        if (stages.contains(s)) arr.push_back(std::string(stage_code(s)));
    }
    return arr;
}

std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

ordered_json scenario_to_json(const ScenarioGraph& s) {
    ordered_json doc;
    ordered_json nodes = ordered_json::array();
    for (const ScenarioNode& n : s.nodes) {
        ordered_json node;
        switch (n.kind) {
            case NodeKind::Internet: node["kind"] = "internet"; break;
            case NodeKind::Assumed: node["kind"] = "assumed"; break;
            case NodeKind::Hosts: node["kind"] = "hosts"; break;
        }
        if (n.kind == NodeKind::Hosts) node["hosts"] = host_set_json(n.hosts);
        nodes.push_back(std::move(node));
    }
    doc["nodes"] = std::move(nodes);

    ordered_json edges = ordered_json::array();
    for (const ScenarioEdge& e : s.edges) {
        ordered_json edge;
        edge["from"] = e.tail;
        edge["to"] = e.head;
        edge["stages"] = stage_set_json(e.label);
        edge["src_hosts"] = host_set_json(e.src_hosts);
        edge["dst_hosts"] = host_set_json(e.dst_hosts);
        edge["first_seen"] = format_rfc3339_us(e.interval.earliest_us);
        edge["last_seen"] = format_rfc3339_us(e.interval.latest_us);
        ordered_json ids = ordered_json::array();
        for (const std::string& id : e.alert_ids) ids.push_back(id);
        edge["alert_ids"] = std::move(ids);
        edges.push_back(std::move(edge));
    }
    doc["edges"] = std::move(edges);
    return doc;
}

std::string scenario_to_dot(const ScenarioGraph& s, const std::string& name) {
    std::string out = "digraph \"" + dot_escape(name) + "\" {\n";
    out += "  rankdir=LR;\n";
    out += "  node [shape=box];\n";
    for (size_t i = 0; i < s.nodes.size(); ++i) {
        out += "  n" + std::to_string(i) + " [label=\"" + dot_escape(s.nodes[i].label()) + "\"];\n";
    }
    for (const ScenarioEdge& e : s.edges) {
        out += "  n" + std::to_string(e.tail) + " -> n" + std::to_string(e.head) + " [label=\"" +
               dot_escape(e.label.to_string()) + "\"];\n";
    }
    out += "}\n";
    return out;
}

ordered_json alert_to_json(const Alert& a) {
    ordered_json doc;
    doc["id"] = a.id;
    doc["kind"] = a.kind;
    if (a.sources.size() == 1) doc["src"] = format_host(*a.sources.begin());
    else doc["src"] = host_set_json(a.sources);
    if (a.targets.size() == 1) doc["dst"] = format_host(*a.targets.begin());
    else doc["dst"] = host_set_json(a.targets);
    doc["ts_first"] = format_rfc3339_us(a.interval.earliest_us);
    if (a.interval.latest_us != a.interval.earliest_us)
        doc["ts_last"] = format_rfc3339_us(a.interval.latest_us);
    if (!a.member_ids.empty()) {
        ordered_json members = ordered_json::array();
        for (const std::string& m : a.member_ids) members.push_back(m);
        doc["members"] = std::move(members);
    }
    return doc;
}

std::string alerts_to_jsonl(const std::vector<Alert>& alerts) {
    std::string out;
    for (const Alert& a : alerts) {
        out += alert_to_json(a).dump();
        out += '\n';
    }
    return out;
}

ordered_json topology_to_json(const ZoneTopology& topo) {
    ordered_json doc;
    for (const auto& zone : topo.zones()) {
        ordered_json cidrs = ordered_json::array();
        for (const Cidr& c : zone.cidrs) cidrs.push_back(format_cidr(c));
        doc[zone.name] = std::move(cidrs);
    }
    return doc;
}

ZoneTopology topology_from_json(const std::string& text) {
    ordered_json doc = ordered_json::parse(text);
    if (!doc.is_object()) throw std::invalid_argument("topology document must be a JSON object");
    std::vector<ZoneTopology::Zone> zones;
    for (auto& [name, value] : doc.items()) {
        ZoneTopology::Zone zone;
        zone.name = name;
        auto add = [&](const std::string& text_cidr) {
            auto c = parse_cidr(text_cidr);
            if (!c) throw std::invalid_argument("zone '" + name + "': bad CIDR '" + text_cidr + "'");
            zone.cidrs.push_back(*c);
        };
        if (value.is_string()) {
            add(value.get<std::string>());
        } else if (value.is_array()) {
            for (const auto& c : value) add(c.get<std::string>());
        } else {
            throw std::invalid_argument("zone '" + name + "' must map to a CIDR or CIDR array");
        }
        zones.push_back(std::move(zone));
    }
    return ZoneTopology::create(std::move(zones));
}

}  // namespace kcsm
