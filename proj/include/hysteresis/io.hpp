#pragma once

#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "hysteresis/cloudcost.hpp"
#include "hysteresis/core.hpp"
#include "hysteresis/report.hpp"

namespace hyst {

using json = nlohmann::json;

void to_json(json& j, const SystemParams& sp);
void from_json(const json& j, SystemParams& sp);
void to_json(json& j, const CostRates& cr);
void from_json(const json& j, CostRates& cr);
void to_json(json& j, const ThresholdPolicy& tp);
void from_json(const json& j, ThresholdPolicy& tp);
void to_json(json& j, const SlaCostModel& m);
void from_json(const json& j, SlaCostModel& m);

// Thresholds above B (the INF sentinel) are written as the string "inf".
json thresholds_to_json(const HysteresisThresholds& ht, const SystemParams& sp);
HysteresisThresholds thresholds_from_json(const json& j, const SystemParams& sp);

json report_to_json(const SolveReport& rep);

// One row "m k action" per state, level-major.
void write_policy(const MdpPolicy& p, std::ostream& os);
MdpPolicy read_policy(std::istream& is, const SystemParams& sp);

// Inline JSON text (starting with '{') or a path to a JSON file.
json load_json_arg(const std::string& arg);

// Space-separated vector rendering with "inf" for values above B.
std::string format_thresholds(const std::vector<int>& v, int big_b);

}  // namespace hyst
