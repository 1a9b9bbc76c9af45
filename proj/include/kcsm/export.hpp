#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "kcsm/model.hpp"
#include "kcsm/scenario.hpp"

namespace kcsm {

using ordered_json = nlohmann::ordered_json;

/// Canonical scenario document: stable key order, sorted sets, no floats.
ordered_json scenario_to_json(const ScenarioGraph& s);

/// DOT rendering: node labels are host sets or "Internet", edge labels the
/// stage codes joined by commas.
std::string scenario_to_dot(const ScenarioGraph& s, const std::string& name);

// Newline-delimited alert schema shared by synth output and ingestion.
ordered_json alert_to_json(const Alert& a);
std::string alerts_to_jsonl(const std::vector<Alert>& alerts);

ordered_json topology_to_json(const ZoneTopology& topo);
ZoneTopology topology_from_json(const std::string& text);

}  // namespace kcsm
