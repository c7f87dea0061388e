#pragma once

#include <ostream>
#include <vector>

#include "hysteresis/core.hpp"
#include "hysteresis/linalg.hpp"

namespace hyst {

// m-range of each level in the MC model: level 1 spans [0,F_1], level
// 1<k<K spans [R_{k-1}+1, F_k], level K spans [R_{K-1}+1, B].
struct LevelLayout {
  int big_k = 1;
  std::vector<int> lo;     // indexed by k (entry 0 unused)
  std::vector<int> hi;
  std::vector<int> start;  // index of (lo_k, k) in level-major ordering

  LevelLayout() = default;
  LevelLayout(const ThresholdPolicy& tp, const SystemParams& sp);

  int size() const { return start[big_k] + hi[big_k] - lo[big_k] + 1; }
  bool contains(int m, int k) const { return k >= 1 && k <= big_k && m >= lo[k] && m <= hi[k]; }
  int index(int m, int k) const { return start[k] + m - lo[k]; }
};

struct HysteresisChain {
  SystemParams sp;
  ThresholdPolicy policy;
  LevelLayout layout;
  std::vector<State> states;   // level-major, m ascending
  SparseRowMatrix generator;   // rows sum to zero
};

struct StationaryDistribution {
  std::vector<State> states;
  std::vector<double> probs;
};

HysteresisChain build_chain(const ThresholdPolicy& tp, const SystemParams& sp);

// Power method on the uniformized chain (constant lambda + K*mu).
StationaryDistribution solve_stationary_direct(const HysteresisChain& chain, double tol = 1e-8,
                                               long max_iter = 1000000, long* iterations = nullptr);

// Exact stationary distribution by sparse LU.
StationaryDistribution solve_stationary_exact(const HysteresisChain& chain);

// Cost rate C(m,k) of state (m,k) in the MC model.
double mc_state_cost(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm, int m, int k);

double expected_cost(const HysteresisChain& chain, const StationaryDistribution& dist, const CostModel& cm);

// Exact evaluation pipeline: build_chain, sparse LU, expected_cost.
double evaluate_policy_exact(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm);

// Level marginals sum_m pi(m,k), indexed by k-1.
std::vector<double> level_marginals(const HysteresisChain& chain, const StationaryDistribution& dist);

// "row col rate" triplets of the generator, one per line.
void dump_generator(const HysteresisChain& chain, std::ostream& os);

}  // namespace hyst
