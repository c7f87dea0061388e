#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hysteresis/core.hpp"

namespace hyst {

// Uniform record of a solver run.
struct SolveReport {
  std::string algorithm;
  SystemParams sp;
  CostModel costs;
  std::optional<ThresholdPolicy> threshold_policy;     // MC solvers
  std::optional<MdpPolicy> mdp_policy;                 // MDP solvers
  std::optional<HysteresisThresholds> thresholds;      // extracted, when hysteresis
  double cost = 0.0;                                   // per unit time
  long iterations = 0;                                 // sweeps / improvement steps
  long evaluations = 0;                                // policy or action evaluations
  long improvement_steps = 0;                          // policy iteration only
  double wall_seconds = 0.0;
  bool converged = true;
  std::vector<double> cost_trace;                      // incumbent cost per iteration
};

}  // namespace hyst
