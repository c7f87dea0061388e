#pragma once

#include <cstdint>
#include <ostream>
#include <variant>
#include <vector>

#include "hysteresis/core.hpp"

namespace hyst {

struct SimConfig {
  double horizon = 1e5;   // simulated time per replication (including warmup)
  double warmup = 0.0;    // discarded prefix
  uint64_t seed = 0;
  int replications = 5;
  int workers = 1;        // replications run in parallel on this many threads
  std::ostream* trace = nullptr;  // "time event m k" lines (replication 0 only)

  void validate() const;
};

// MC policies decide on the state observed just before a natural transition;
// MDP policies decide right after it.
using SimPolicy = std::variant<ThresholdPolicy, MdpPolicy>;

struct SimResult {
  double mean_cost = 0.0;               // across replications, per unit time
  double half_width = 0.0;              // normal-approximation 95% half-width
  std::vector<double> replication_costs;
  // Fraction of time per state, level-major over all (m,k) (index
  // (k-1)*(B+1)+m), averaged over replications. For MDP policies the state
  // is the one observed at the last decision epoch.
  std::vector<double> occupancy;
  long events = 0;
};

// lambda may be 0 here (draining system); all other parameters as usual.
SimResult simulate(const SimPolicy& policy, const SystemParams& sp, const CostModel& cm, const SimConfig& cfg);

}  // namespace hyst
