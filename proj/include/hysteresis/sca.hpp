#pragma once

#include <memory>
#include <vector>

#include "hysteresis/core.hpp"
#include "hysteresis/ctmc.hpp"

namespace hyst {

// Folded per-level chain of the stochastic complement decomposition.
struct MicroChain {
  int level = 1;
  int lo = 0;                 // R_{k-1}+1 (0 for level 1)
  int hi = 0;                 // F_k (B for level K)
  std::vector<double> dist;   // pi_k(m), m = lo..hi
  double level_cost = 0.0;    // sum_m pi_k(m) * C(m,k)

  double prob(int m) const { return dist[m - lo]; }
};

struct MacroChain {
  std::vector<double> up_rates;    // lambda_k, k = 1..K-1
  std::vector<double> down_rates;  // mu_k, k = 2..K
  std::vector<double> dist;        // Pi(k), k = 1..K
};

enum class MicroMethod { ClosedForm, PowerMethod };

// Builds the folded generator of level k (used by the power-method path).
SparseRowMatrix micro_generator(const ThresholdPolicy& tp, const SystemParams& sp, int k);

MicroChain solve_micro(const ThresholdPolicy& tp, const SystemParams& sp, int k, const CostModel& cm,
                       MicroMethod method = MicroMethod::ClosedForm);

MacroChain solve_macro(const std::vector<MicroChain>& micros, const SystemParams& sp);

StationaryDistribution sca_distribution(const ThresholdPolicy& tp, const SystemParams& sp,
                                        MicroMethod method = MicroMethod::ClosedForm);

double aggregated_cost(const std::vector<MicroChain>& micros, const MacroChain& macro);

enum class ThresholdKind { F, R };

struct ThresholdChange {
  ThresholdKind kind = ThresholdKind::F;
  int index = 1;   // k in 1..K-1
  int value = 0;
};

// Incremental solution cache: micro-chains of the current policy are
// shared (immutable) between caches, so untouched levels keep identity.
struct ScaCache {
  SystemParams sp;
  CostModel cm;
  ThresholdPolicy policy;
  std::vector<std::shared_ptr<const MicroChain>> micros;
  MacroChain macro;
  double cost = 0.0;
  int micro_solves = 0;  // micro-chains solved to produce this cache

  static ScaCache build(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm);
};

ThresholdPolicy apply_change(const ThresholdPolicy& tp, const ThresholdChange& change);

// Re-solves only levels k and k+1 and the macro chain. Throws
// std::invalid_argument (leaving the input cache untouched) when the
// changed policy is invalid.
ScaCache incremental_cost(const ScaCache& cache, const ThresholdChange& change);

}  // namespace hyst
