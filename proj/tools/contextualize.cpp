// contextualize — synthesizes multi-stage attack scenario graphs from
// network IDS alerts using zone topology and a kill chain state machine.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "CLI11.hpp"
#include "kcsm/export.hpp"
#include "kcsm/pipeline.hpp"
#include "kcsm/synth.hpp"

namespace {

bool use_color() {
    return isatty(2) && std::getenv("NO_COLOR") == nullptr;
}

void fail(const std::string& msg) {
    if (use_color()) fprintf(stderr, "\x1b[31merror:\x1b[0m %s\n", msg.c_str());
    else fprintf(stderr, "error: %s\n", msg.c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kcsm::IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

kcsm::ZoneTopology load_topology(const std::string& path) {
    try {
        return kcsm::topology_from_json(slurp(path));
    } catch (const kcsm::IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw kcsm::ConfigError("topology file " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw kcsm::IoError("cannot write " + path);
    out << content;
}

int cmd_run(const std::string& topology_path, const std::vector<std::string>& alert_paths,
            const std::string& machine_path, const std::string& window, const std::string& exports,
            const std::string& out_dir, bool strict, size_t cap, const std::string& horizon,
            bool serial) {
    kcsm::PipelineConfig cfg;
    cfg.topology = load_topology(topology_path);
    if (!machine_path.empty()) cfg.machine = kcsm::parse_machine(slurp(machine_path));
    cfg.batch_window_us = kcsm::parse_duration_us(window);
    if (!horizon.empty()) cfg.retire_horizon_us = kcsm::parse_duration_us(horizon);
    cfg.scenario_cap = cap;
    cfg.output_dir = out_dir;
    cfg.strict = strict;
    cfg.exec = serial ? kcsm::ExecMode::Serial : kcsm::ExecMode::Parallel;
    if (exports == "json") cfg.export_mode = kcsm::ExportMode::Json;
    else if (exports == "dot") cfg.export_mode = kcsm::ExportMode::Dot;
    else if (exports == "both") cfg.export_mode = kcsm::ExportMode::Both;
    else throw kcsm::ConfigError("--export must be json, dot or both");

    std::vector<std::filesystem::path> inputs(alert_paths.begin(), alert_paths.end());
    kcsm::RunReport report;
    int rc = kcsm::run(cfg, inputs, &report);
    if (rc == 0) {
        printf("alerts %zu (lines %zu, malformed %zu, external %zu) -> scenarios %zu distinct of %zu"
               " | reduction %s%% | batches %zu\n",
               report.ingest.alerts, report.ingest.lines, report.ingest.malformed,
               report.ingest.dropped_external, report.scenarios.scenarios.size(),
               report.scenarios.total_extracted, report.reduction_percent.c_str(), report.batches);
        printf("wrote %s\n", out_dir.c_str());
    }
    return rc;
}

int cmd_stages(const std::string& topology_path, const std::string& alerts_path, bool strict) {
    kcsm::ZoneTopology topo = load_topology(topology_path);
    kcsm::IngestResult in = kcsm::ingest(alerts_path, topo, strict);
    for (const kcsm::Alert& a : in.alerts) {
        auto dir = kcsm::alert_direction(a, topo);
        if (dir.status != kcsm::DirectionStatus::Ok) continue;
        kcsm::ordered_json rec;
        rec["id"] = a.id;
        rec["direction"] = {{"class", std::string(kcsm::direction_class_name(dir.direction.cls))},
                            {"src_zone", dir.direction.src_zone},
                            {"dst_zone", dir.direction.dst_zone}};
        kcsm::ordered_json stages = kcsm::ordered_json::array();
        kcsm::StageSet set = kcsm::assign_stages(dir.direction);
        for (kcsm::AptStage s : kcsm::kAllStages) {
            if (set.contains(s)) stages.push_back(std::string(kcsm::stage_code(s)));
        }
        rec["stages"] = std::move(stages);
        printf("%s\n", rec.dump().c_str());
    }
    fprintf(stderr, "%zu alerts, %zu malformed, %zu external-only dropped\n", in.stats.alerts,
            in.stats.malformed, in.stats.dropped_external);
    return 0;
}

int cmd_synth(const std::string& campaign, int noise_per_day, int days, uint64_t seed,
              int internal_hosts, int external_hosts, const std::string& mix,
              const std::string& out_path, std::string topo_out) {
    kcsm::NoiseSpec noise;
    noise.alerts_per_day = noise_per_day;
    noise.days = days;
    noise.seed = seed;
    noise.internal_hosts = internal_hosts;
    noise.external_hosts = external_hosts;
    if (!mix.empty()) {
        if (sscanf(mix.c_str(), "%d,%d,%d,%d", &noise.direction_mix[0], &noise.direction_mix[1],
                   &noise.direction_mix[2], &noise.direction_mix[3]) != 4)
            throw kcsm::ConfigError("--mix expects four comma-separated weights");
    }

    kcsm::ZoneTopology topo = kcsm::builtin_ids2018_topology();
    std::vector<kcsm::Alert> alerts;
    if (campaign == "example") {
        topo = kcsm::builtin_example_topology();
        alerts = kcsm::generate_mixed(kcsm::builtin_example(), noise, topo);
    } else if (campaign == "ids2018-apt") {
        alerts = kcsm::generate(kcsm::builtin_ids2018_apt(), noise, topo);
    } else if (campaign == "none" || campaign.empty()) {
        alerts = kcsm::generate(std::nullopt, noise, topo);
    } else {
        kcsm::CampaignSpec spec = kcsm::parse_campaign_json(slurp(campaign));
        alerts = kcsm::generate(spec, noise, topo);
    }

    write_text(out_path, kcsm::alerts_to_jsonl(alerts));
    if (topo_out.empty()) topo_out = out_path + ".topo.json";
    write_text(topo_out, kcsm::topology_to_json(topo).dump(2) + "\n");
    printf("wrote %zu alerts to %s (topology: %s)\n", alerts.size(), out_path.c_str(),
           topo_out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kill-chain contextualization of IDS alerts into APT scenario graphs"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Ingest alerts and write scenario graphs");
    std::string topology_path, machine_path, window = "1d", exports = "json", out_dir = "out";
    std::string horizon;
    std::vector<std::string> alert_paths;
    bool strict = false, serial = false;
    size_t cap = 10000;
    run->add_option("--topology", topology_path, "Zone topology JSON")->required();
    run->add_option("--alerts", alert_paths, "Alert files (JSONL)")->required()->expected(-1);
    run->add_option("--machine", machine_path, "Stage machine definition file");
    run->add_option("--batch-window", window, "Batch window, e.g. 1d, 12h (default 1d)");
    run->add_option("--export", exports, "json, dot or both (default json)");
    run->add_option("--out", out_dir, "Output directory (default out)");
    run->add_flag("--strict", strict, "Schema violations are fatal (exit 2)");
    run->add_option("--scenario-cap", cap, "Max scenarios per infection graph");
    run->add_option("--retire-horizon", horizon, "Retire carried alerts older than this");
    run->add_flag("--serial", serial, "Disable the parallel kernels");

    // stages
    auto* stages = app.add_subcommand("stages", "Print per-alert stage assignment");
    std::string st_topology, st_alerts;
    bool st_strict = false;
    stages->add_option("--topology", st_topology, "Zone topology JSON")->required();
    stages->add_option("--alerts", st_alerts, "Alert file (JSONL)")->required();
    stages->add_flag("--strict", st_strict, "Schema violations are fatal (exit 2)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic alert fixture");
    std::string campaign = "none", synth_out, topo_out, mix;
    int noise_per_day = 0, days = 10, internal_hosts = 450, external_hosts = 2000;
    uint64_t seed = 7;
    synth->add_option("--campaign", campaign, "ids2018-apt, example, none or a campaign JSON file");
    synth->add_option("--noise-per-day", noise_per_day, "Noise alerts per day (default 0)");
    synth->add_option("--days", days, "Days of noise (default 10)");
    synth->add_option("--seed", seed, "Noise seed (default 7)");
    synth->add_option("--internal-hosts", internal_hosts, "Internal noise host pool (default 450)");
    synth->add_option("--external-hosts", external_hosts, "External noise host pool (default 2000)");
    synth->add_option("--mix", mix, "Direction weights in,out,same,cross (default 40,40,10,10)");
    synth->add_option("--out", synth_out, "Output alert file")->required();
    synth->add_option("--topo-out", topo_out, "Topology output (default <out>.topo.json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(topology_path, alert_paths, machine_path, window, exports, out_dir,
                           strict, cap, horizon, serial);
        if (stages->parsed()) return cmd_stages(st_topology, st_alerts, st_strict);
        if (synth->parsed())
            return cmd_synth(campaign, noise_per_day, days, seed, internal_hosts, external_hosts,
                             mix, synth_out, topo_out);
    } catch (const kcsm::SchemaError& e) {
        fail(e.what());
        return 2;
    } catch (const std::exception& e) {
        fail(e.what());
        return 1;
    }
    return 0;
}
