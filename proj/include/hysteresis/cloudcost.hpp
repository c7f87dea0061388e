#pragma once

#include <string>
#include <utility>

#include "hysteresis/core.hpp"

namespace hyst {

// Financial cost model of the cloud provider (all monetary values in euros,
// rates per hour).
struct SlaCostModel {
  double c_p = 0.0;       // penalty per customer-hour over the SLA and per rejection
  double c_s = 0.0;       // running cost per VM and hour
  double c_a = 0.0;       // activation cost per event
  double c_d = 0.0;       // deactivation cost per event
  double c_static = 0.0;  // idle cost of the physical host per hour
  double t_sla = 0.0;     // SLA response-time bound (hours)

  double n_sla(double lambda) const { return t_sla * lambda; }
  void validate() const;
};

// Abstract cost model equivalent: holding = c_p * max(m - N_SLA, 0),
// rejection = c_p per lost request, plus the static host cost.
CostModel to_cost_model(const SlaCostModel& model, double lambda);

// Cost rate of state (m,k) in the MC model with thresholds tp.
double sla_state_cost(int m, int k, const SlaCostModel& model, const SystemParams& sp, const ThresholdPolicy& tp);

// Presets A, B, C (lambda = 50 req/h, B = 100, t_sla = 0).
std::pair<SystemParams, SlaCostModel> preset(const std::string& model_id);

}  // namespace hyst
