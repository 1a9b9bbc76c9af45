#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcsm/alert_graph.hpp"
#include "kcsm/scenario.hpp"

namespace kcsm {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExportMode : uint8_t { Json, Dot, Both };

struct PipelineConfig {
    ZoneTopology topology;
    StageMachine machine = default_machine();
    int64_t batch_window_us = 86400ll * 1000000;   // one day
    size_t scenario_cap = 10000;
    std::filesystem::path output_dir;
    ExportMode export_mode = ExportMode::Json;
    bool strict = false;
    // Carried alert-graph nodes older than this are retired; 0 = unbounded.
    int64_t retire_horizon_us = 0;
    ExecMode exec = ExecMode::Parallel;
};

/// Parses "1d", "12h", "30m" or "45s" (plain integers mean seconds).
int64_t parse_duration_us(const std::string& text);

struct IngestStats {
    size_t lines = 0;               // non-empty input lines
    size_t parsed = 0;              // lines that produced at least one alert
    size_t malformed = 0;           // lines rejected by the schema
    size_t dropped_external = 0;    // lines entirely external-to-external
    size_t alerts = 0;              // pipeline alerts after direction split

    void merge(const IngestStats& o) {
        lines += o.lines;
        parsed += o.parsed;
        malformed += o.malformed;
        dropped_external += o.dropped_external;
        alerts += o.alerts;
    }
};

struct IngestResult {
    std::vector<Alert> alerts;          // direction-split, sorted by (earliest, id)
    IngestStats stats;
    std::vector<std::string> problems;  // first few diagnostics, for the report
};

/// Reads one newline-delimited alert file and direction-splits it. Malformed
/// lines are counted and reported; under strict they raise SchemaError.
/// Missing files raise IoError.
IngestResult ingest(const std::filesystem::path& path, const ZoneTopology& topo, bool strict);

/// Parses alert lines that are already in memory (used by ingest and tests).
IngestResult ingest_lines(const std::string& text, const ZoneTopology& topo, bool strict,
                          const std::string& origin = "<memory>");

/// Cross-batch state: the shortcut-eliminated alert graph of everything seen
/// so far plus running counters.
struct BatchState {
    AlertGraph carried;
    size_t processed_batches = 0;
    size_t dropped_external = 0;
    size_t retired_nodes = 0;
};

/// Feeds one chronological batch into the carried graph and returns the
/// cumulative scenario set (consolidate + extract + prune over everything
/// carried). Out-of-order batches are reordered with a warning counter.
ScenarioSet process_batch(BatchState& state, std::vector<Alert> batch, const PipelineConfig& cfg);

struct RunReport {
    IngestStats ingest;
    size_t batches = 0;
    size_t graph_nodes = 0;
    size_t graph_edges_kept = 0;       // after shortcut elimination
    size_t infection_graphs = 0;
    size_t infection_edges = 0;
    ScenarioSet scenarios;
    std::string reduction_percent;     // of stats.alerts
    std::vector<std::pair<std::string, size_t>> per_stage;       // stage code -> alerts containing it
    std::vector<std::pair<std::string, size_t>> per_direction;   // class name -> alerts
    std::vector<std::string> problems;
};

/// End-to-end driver: ingest every input, process in batch windows, write
/// scenario exports plus report.json and index.json into the output dir.
/// Returns 0 on success, 1 on fatal config/IO errors, 2 on strict schema
/// violations (matching the CLI exit codes).
int run(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& inputs,
        RunReport* report_out = nullptr);

}  // namespace kcsm
