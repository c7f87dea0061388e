#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hysteresis/core.hpp"
#include "hysteresis/report.hpp"
#include "hysteresis/sca.hpp"

namespace hyst {

enum class EvaluatorKind { Direct, AggregatedIncremental };
enum class InitKind { LowestFeasible, Random, Mmk };

struct SearchConfig {
  EvaluatorKind evaluator = EvaluatorKind::Direct;
  InitKind initializer = InitKind::LowestFeasible;
  uint64_t seed = 0;            // used by InitKind::Random
  long max_sweeps = 100000;     // BPL sweeps / NLS iterations
  double improvement_tol = 0.0; // absolute; a move must improve by more than this
  // Called for every policy evaluation with its cost.
  std::function<void(const ThresholdPolicy&, double)> on_evaluate;
};

// Cost oracle used by the local searches. The aggregated-incremental
// evaluator re-solves only the two micro-chains touched by a single
// threshold change relative to the incumbent.
class PolicyEvaluator {
 public:
  PolicyEvaluator(const SystemParams& sp, const CostModel& cm, EvaluatorKind kind);

  double evaluate(const ThresholdPolicy& tp);
  // Makes tp the incumbent used as the base for incremental evaluation.
  void commit(const ThresholdPolicy& tp);
  long evaluations() const { return evaluations_; }

 private:
  SystemParams sp_;
  CostModel cm_;
  EvaluatorKind kind_;
  long evaluations_ = 0;
  std::unique_ptr<ScaCache> base_;
  std::unique_ptr<ScaCache> last_;
};

// Exhaustive enumeration; throws std::length_error when the number of valid
// policies exceeds budget.
SolveReport exhaustive_search(const SystemParams& sp, const CostModel& cm, double budget = 5e6);

SolveReport bpl(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg = {});

SolveReport nls(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg = {});

// M/M/k/B stationary distribution over m = 0..B.
std::vector<double> mmk_stationary(int k, const SystemParams& sp);

ThresholdPolicy mmk_thresholds(const SystemParams& sp, const CostModel& cm);

// Policy drawn by sequential uniform sampling of F then R.
ThresholdPolicy random_policy(const SystemParams& sp, uint64_t seed);

ThresholdPolicy initial_policy(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg);

}  // namespace hyst
