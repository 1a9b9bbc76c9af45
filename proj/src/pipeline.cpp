#include "kcsm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kcsm/export.hpp"
#include "kcsm/infection_graph.hpp"
#include "kcsm/synth.hpp"

namespace kcsm {

int64_t parse_duration_us(const std::string& text) {
    if (text.empty()) throw ConfigError("empty duration");
    size_t pos = 0;
    long long value = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        value = value * 10 + (text[pos] - '0');
        ++pos;
    }
    if (pos == 0) throw ConfigError("bad duration '" + text + "'");
    long long scale;
    std::string unit = text.substr(pos);
    if (unit.empty() || unit == "s") scale = 1;
    else if (unit == "m") scale = 60;
    else if (unit == "h") scale = 3600;
    else if (unit == "d") scale = 86400;
    else throw ConfigError("bad duration unit '" + unit + "' (use s, m, h or d)");
    if (value <= 0) throw ConfigError("duration must be positive");
    return value * scale * 1000000ll;
}

namespace {

std::optional<HostSet> hosts_field(const nlohmann::json& v) {
    std::vector<HostAddr> hosts;
    if (v.is_string()) {
        auto h = parse_host(v.get<std::string>());
        if (!h) return std::nullopt;
        hosts.push_back(*h);
    } else if (v.is_array()) {
        if (v.empty()) return std::nullopt;
        for (const auto& item : v) {
            if (!item.is_string()) return std::nullopt;
            auto h = parse_host(item.get<std::string>());
            if (!h) return std::nullopt;
            hosts.push_back(*h);
        }
    } else {
        return std::nullopt;
    }
    return HostSet(std::move(hosts));
}

// One schema line -> Alert. Returns an error message instead on violations.
std::optional<std::string> parse_alert_line(const std::string& line, Alert& out) {
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return "not a JSON object";
    if (!doc.contains("id") || !doc["id"].is_string()) return "missing string 'id'";
    out.id = doc["id"].get<std::string>();
    if (out.id.empty()) return "empty 'id'";
    out.kind = doc.value("kind", std::string("alert"));
    if (!doc.contains("src") || !doc.contains("dst")) return "missing 'src' or 'dst'";
    auto sources = hosts_field(doc["src"]);
    if (!sources) return "bad 'src' (IPv4 string or array expected)";
    auto targets = hosts_field(doc["dst"]);
    if (!targets) return "bad 'dst' (IPv4 string or array expected)";
    out.sources = std::move(*sources);
    out.targets = std::move(*targets);
    if (!doc.contains("ts_first") || !doc["ts_first"].is_string()) return "missing 'ts_first'";
    auto first = parse_rfc3339_us(doc["ts_first"].get<std::string>());
    if (!first) return "bad 'ts_first' timestamp";
    int64_t last = *first;
    if (doc.contains("ts_last")) {
        if (!doc["ts_last"].is_string()) return "bad 'ts_last'";
        auto parsed = parse_rfc3339_us(doc["ts_last"].get<std::string>());
        if (!parsed) return "bad 'ts_last' timestamp";
        last = *parsed;
    }
    if (last < *first) return "'ts_last' precedes 'ts_first'";
    out.interval = TimeInterval{*first, last};
    out.member_ids.clear();
    if (doc.contains("members")) {
        if (!doc["members"].is_array()) return "'members' must be an array";
        for (const auto& m : doc["members"]) {
            if (!m.is_string()) return "'members' must hold strings";
            out.member_ids.push_back(m.get<std::string>());
        }
    }
    bool meta_shape = out.sources.size() > 1 || out.targets.size() > 1 ||
                      out.interval.earliest_us != out.interval.latest_us;
    if (meta_shape && out.member_ids.empty())
        return "meta-alert shape (multiple hosts or spanning interval) without 'members'";
    return std::nullopt;
}

}  // namespace

IngestResult ingest_lines(const std::string& text, const ZoneTopology& topo, bool strict,
                          const std::string& origin) {
    IngestResult result;
    std::set<std::string> seen_ids;
    size_t lineno = 0;
    size_t pos = 0;
    auto problem = [&](const std::string& what) {
        ++result.stats.malformed;
        std::string msg = origin + ":" + std::to_string(lineno) + ": " + what;
        if (strict) throw SchemaError(msg);
        if (result.problems.size() < 20) result.problems.push_back(msg);
    };
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        ++result.stats.lines;

        Alert alert;
        if (auto err = parse_alert_line(line, alert)) {
            problem(*err);
            continue;
        }
        if (!seen_ids.insert(alert.id).second) {
            problem("duplicate alert id '" + alert.id + "'");
            continue;
        }
        DirectionSplit split = split_by_direction(alert, topo);
        if (split.external_only) {
            ++result.stats.dropped_external;
            continue;
        }
        if (split.degenerate || split.alerts.empty()) {
            problem("alert has no usable source/target pair");
            continue;
        }
        ++result.stats.parsed;
        for (Alert& part : split.alerts) {
            ++result.stats.alerts;
            result.alerts.push_back(std::move(part));
        }
    }
    std::sort(result.alerts.begin(), result.alerts.end(), [](const Alert& a, const Alert& b) {
        if (a.interval.earliest_us != b.interval.earliest_us)
            return a.interval.earliest_us < b.interval.earliest_us;
        return a.id < b.id;
    });
    return result;
}

IngestResult ingest(const std::filesystem::path& path, const ZoneTopology& topo, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open alert file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_lines(buf.str(), topo, strict, path.string());
}

ScenarioSet process_batch(BatchState& state, std::vector<Alert> batch, const PipelineConfig& cfg) {
    // Batches are expected in chronological order; repair quietly if not.
    std::stable_sort(batch.begin(), batch.end(), [](const Alert& a, const Alert& b) {
        if (a.interval.earliest_us != b.interval.earliest_us)
            return a.interval.earliest_us < b.interval.earliest_us;
        return a.id < b.id;
    });

    if (cfg.retire_horizon_us > 0 && !batch.empty() && !state.carried.nodes().empty()) {
        int64_t horizon = batch.back().interval.latest_us - cfg.retire_horizon_us;
        bool any_old = false;
        for (const AlertNode& n : state.carried.nodes()) {
            if (n.interval.latest_us < horizon) {
                any_old = true;
                break;
            }
        }
        if (any_old) {
            AlertGraph trimmed;
            std::vector<int64_t> remap(state.carried.nodes().size(), -1);
            for (uint32_t i = 0; i < state.carried.nodes().size(); ++i) {
                const AlertNode& n = state.carried.nodes()[i];
                if (n.interval.latest_us < horizon) {
                    ++state.retired_nodes;
                    continue;
                }
                remap[i] = trimmed.add_node(n);
            }
            std::vector<AlertEdge> kept;
            for (const AlertEdge& e : state.carried.edges()) {
                if (remap[e.from] >= 0 && remap[e.to] >= 0) {
                    kept.push_back(AlertEdge{static_cast<uint32_t>(remap[e.from]),
                                             static_cast<uint32_t>(remap[e.to]), e.label});
                }
            }
            trimmed.add_edges(std::move(kept));
            state.carried = std::move(trimmed);
        }
    }

    BuildStats build_stats;
    extend_alert_graph(state.carried, cfg.machine, cfg.topology, batch, &build_stats, cfg.exec);
    state.dropped_external += build_stats.dropped_external;
    state.carried = eliminate_shortcuts(state.carried, cfg.exec);
    ++state.processed_batches;

    InfectionGraph infection = consolidate(state.carried, cfg.exec);
    bool truncated = false;
    auto raw = extract_scenarios(cfg.machine, infection, cfg.scenario_cap, &truncated);
    ScenarioSet set = prune_scenarios(std::move(raw), cfg.exec);
    set.truncated = truncated;
    return set;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("short write to " + path.string());
}

std::string scenario_file_stem(size_t index) {
    char buf[24];
    snprintf(buf, sizeof buf, "scenario_%05zu", index + 1);
    return buf;
}

}  // namespace

int run(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& inputs,
        RunReport* report_out) {
    RunReport report;
    try {
        if (inputs.empty()) throw ConfigError("no alert files given");
        if (cfg.batch_window_us <= 0) throw ConfigError("batch window must be positive");

        std::vector<Alert> alerts;
        for (const auto& path : inputs) {
            IngestResult one = ingest(path, cfg.topology, cfg.strict);
            report.ingest.merge(one.stats);
            for (auto& p : one.problems) {
                if (report.problems.size() < 20) report.problems.push_back(std::move(p));
            }
            alerts.insert(alerts.end(), std::make_move_iterator(one.alerts.begin()),
                          std::make_move_iterator(one.alerts.end()));
        }
        std::sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
            if (a.interval.earliest_us != b.interval.earliest_us)
                return a.interval.earliest_us < b.interval.earliest_us;
            return a.id < b.id;
        });

        // Stage/direction tallies over the split alerts.
        std::map<std::string, size_t> stage_counts;
        std::map<std::string, size_t> direction_counts;
        for (const Alert& a : alerts) {
            auto dir = alert_direction(a, cfg.topology);
            if (dir.status != DirectionStatus::Ok) continue;
            ++direction_counts[std::string(direction_class_name(dir.direction.cls))];
            StageSet stages = assign_stages(dir.direction);
            for (AptStage s : kAllStages) {
                if (stages.contains(s)) ++stage_counts[std::string(stage_code(s))];
            }
        }

        // Chronological batches by window index.
        std::map<int64_t, std::vector<Alert>> batches;
        for (Alert& a : alerts) {
            int64_t window = a.interval.earliest_us >= 0
                                 ? a.interval.earliest_us / cfg.batch_window_us
                                 : (a.interval.earliest_us - cfg.batch_window_us + 1) / cfg.batch_window_us;
            batches[window].push_back(std::move(a));
        }

        BatchState state;
        ScenarioSet scenarios;
        for (auto& [window, batch] : batches) {
            scenarios = process_batch(state, std::move(batch), cfg);
        }
        report.batches = state.processed_batches;
        report.graph_nodes = state.carried.nodes().size();
        report.graph_edges_kept = state.carried.edges().size();

        InfectionGraph infection = consolidate(state.carried, cfg.exec);
        report.infection_graphs = infection.component_count();
        report.infection_edges = infection.edges().size();
        report.scenarios = std::move(scenarios);
        report.reduction_percent =
            report.ingest.alerts == 0
                ? "0.00"
                : volume_reduction_percent(report.scenarios.scenarios.size(), report.ingest.alerts);
        for (auto& [code, count] : stage_counts) report.per_stage.push_back({code, count});
        for (auto& [name, count] : direction_counts) report.per_direction.push_back({name, count});

        if (!cfg.output_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(cfg.output_dir, ec);
            if (ec) throw IoError("cannot create output dir " + cfg.output_dir.string());

            ordered_json index = ordered_json::array();
            for (size_t i = 0; i < report.scenarios.scenarios.size(); ++i) {
                const ScenarioGraph& s = report.scenarios.scenarios[i];
                std::string stem = scenario_file_stem(i);
                if (cfg.export_mode != ExportMode::Dot) {
                    write_file(cfg.output_dir / (stem + ".json"),
                               scenario_to_json(s).dump(2) + "\n");
                }
                if (cfg.export_mode != ExportMode::Json) {
                    write_file(cfg.output_dir / (stem + ".dot"), scenario_to_dot(s, stem));
                }
                ordered_json entry;
                entry["file"] = stem;
                entry["nodes"] = s.nodes.size();
                entry["edges"] = s.edges.size();
                size_t ids = 0;
                int64_t first = 0, last = 0;
                for (const ScenarioEdge& e : s.edges) {
                    ids += e.alert_ids.size();
                    if (first == 0 || e.interval.earliest_us < first) first = e.interval.earliest_us;
                    if (e.interval.latest_us > last) last = e.interval.latest_us;
                }
                entry["alert_ids"] = ids;
                entry["first_seen"] = format_rfc3339_us(first);
                entry["last_seen"] = format_rfc3339_us(last);
                index.push_back(std::move(entry));
            }
            write_file(cfg.output_dir / "index.json", index.dump(2) + "\n");

            ordered_json rep;
            rep["input"] = {{"lines", report.ingest.lines},
                            {"parsed", report.ingest.parsed},
                            {"malformed", report.ingest.malformed},
                            {"dropped_external", report.ingest.dropped_external},
                            {"alerts", report.ingest.alerts}};
            rep["batches"] = report.batches;
            rep["alert_graph"] = {{"nodes", report.graph_nodes},
                                  {"edges_kept", report.graph_edges_kept}};
            rep["infection"] = {{"graphs", report.infection_graphs},
                                {"edges", report.infection_edges}};
            rep["scenarios"] = {{"total", report.scenarios.total_extracted},
                                {"exact_duplicates", report.scenarios.exact_duplicates},
                                {"pruned", report.scenarios.witnesses.size()},
                                {"distinct", report.scenarios.scenarios.size()},
                                {"truncated", report.scenarios.truncated}};
            rep["reduction"] = {{"distinct", report.scenarios.scenarios.size()},
                                {"alerts", report.ingest.alerts},
                                {"percent", report.reduction_percent}};
            ordered_json stages_json;
            for (auto& [code, count] : report.per_stage) stages_json[code] = count;
            rep["stages"] = std::move(stages_json);
            ordered_json dirs_json;
            for (auto& [name, count] : report.per_direction) dirs_json[name] = count;
            rep["directions"] = std::move(dirs_json);
            ordered_json witnesses = ordered_json::array();
            for (const PruneWitness& w : report.scenarios.witnesses) {
                ordered_json entry;
                entry["retained"] = scenario_file_stem(w.retained_index);
                entry["node_map"] = w.node_map;
                entry["pruned"] = w.pruned_canonical;
                witnesses.push_back(std::move(entry));
            }
            rep["pruning_witnesses"] = std::move(witnesses);
            ordered_json problems = ordered_json::array();
            for (const std::string& p : report.problems) problems.push_back(p);
            rep["problems"] = std::move(problems);
            write_file(cfg.output_dir / "report.json", rep.dump(2) + "\n");
        }
    } catch (const SchemaError& e) {
        if (report_out) *report_out = std::move(report);
        fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        if (report_out) *report_out = std::move(report);
        fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    if (report_out) *report_out = std::move(report);
    return 0;
}

}  // namespace kcsm
