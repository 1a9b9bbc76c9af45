#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kcsm/model.hpp"
#include "kcsm/stages.hpp"

namespace kcsm {

/// One campaign step: hosts acting on a given day with an intended stage.
/// The stage hint documents the step; the pipeline never sees it.
struct CampaignStep {
    int day = 1;   // 1-based
    AptStage stage_hint = AptStage::R;
    HostSet sources;
    HostSet targets;
    std::string kind;
};

struct CampaignSpec {
    std::vector<CampaignStep> steps;   // days non-decreasing
    uint64_t seed = 0;
};

/// Background noise: singleton alerts sampled per day over fixed host pools.
struct NoiseSpec {
    int alerts_per_day = 0;
    int days = 0;
    int internal_hosts = 450;
    int external_hosts = 2000;
    // Weights for inbound / outbound / internal-same / internal-cross.
    std::array<int, 4> direction_mix = {40, 40, 10, 10};
    uint64_t seed = 7;
};

/// Alerts for days start at this instant; day N covers
/// [base + (N-1) days, base + N days).
int64_t synth_base_us();

/// The six alerts of the worked two-zone example: a recon sweep, a delivery,
/// a second-stage download, two pivots and an internal discovery scan.
std::vector<Alert> builtin_example();
ZoneTopology builtin_example_topology();

/// The five-step reference campaign: remote code execution, trojan
/// download, C&C beacon, lateral movement, exfiltration, on days
/// 1, 1, 4, 8 and 10.
CampaignSpec builtin_ids2018_apt();
ZoneTopology builtin_ids2018_topology();

/// Deterministic interleaving of campaign alerts (ids prefixed "gt:") with
/// seeded noise. Noise never touches campaign hosts, so ground truth stays
/// attributable. Throws std::invalid_argument on inconsistent specs.
std::vector<Alert> generate(const std::optional<CampaignSpec>& campaign, const NoiseSpec& noise,
                            const ZoneTopology& topo);

/// Same, but over pre-built campaign alerts (used for the worked example,
/// whose steps are alerts already).
std::vector<Alert> generate_mixed(std::vector<Alert> campaign_alerts, const NoiseSpec& noise,
                                  const ZoneTopology& topo);

/// Loads a campaign spec document (JSON). See README for the schema.
CampaignSpec parse_campaign_json(const std::string& text);

}  // namespace kcsm
