#include "hysteresis/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "hysteresis/ctmc.hpp"
#include "hysteresis/rng.hpp"

namespace hyst {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// The single threshold in which a and b differ, if exactly one does.
std::optional<ThresholdChange> single_change(const ThresholdPolicy& base, const ThresholdPolicy& tp) {
  std::optional<ThresholdChange> out;
  int diffs = 0;
  for (size_t i = 0; i < tp.f.size(); ++i) {
    if (tp.f[i] != base.f[i]) {
      ++diffs;
      out = ThresholdChange{ThresholdKind::F, static_cast<int>(i) + 1, tp.f[i]};
    }
    if (tp.r[i] != base.r[i]) {
      ++diffs;
      out = ThresholdChange{ThresholdKind::R, static_cast<int>(i) + 1, tp.r[i]};
    }
  }
  if (diffs != 1) return std::nullopt;
  return out;
}

}  // namespace

PolicyEvaluator::PolicyEvaluator(const SystemParams& sp, const CostModel& cm, EvaluatorKind kind)
    : sp_(sp), cm_(cm), kind_(kind) {}

double PolicyEvaluator::evaluate(const ThresholdPolicy& tp) {
  ++evaluations_;
  if (kind_ == EvaluatorKind::Direct) return evaluate_policy_exact(tp, sp_, cm_);
  if (base_) {
    if (base_->policy == tp) return base_->cost;
    if (auto ch = single_change(base_->policy, tp)) {
      last_ = std::make_unique<ScaCache>(incremental_cost(*base_, *ch));
      return last_->cost;
    }
  }
  last_ = std::make_unique<ScaCache>(ScaCache::build(tp, sp_, cm_));
  return last_->cost;
}

void PolicyEvaluator::commit(const ThresholdPolicy& tp) {
  if (kind_ == EvaluatorKind::Direct) return;
  if (base_ && base_->policy == tp) return;
  if (last_ && last_->policy == tp) {
    base_ = std::move(last_);
    return;
  }
  if (base_) {
    if (auto ch = single_change(base_->policy, tp)) {
      base_ = std::make_unique<ScaCache>(incremental_cost(*base_, *ch));
      return;
    }
  }
  base_ = std::make_unique<ScaCache>(ScaCache::build(tp, sp_, cm_));
}

SolveReport exhaustive_search(const SystemParams& sp, const CostModel& cm, double budget) {
  sp.validate();
  const double count = count_valid_policies(sp);
  if (count > budget) {
    std::ostringstream os;
    os << "exhaustive search refused: " << count << " valid policies exceed the budget of " << budget;
    throw std::length_error(os.str());
  }
  const auto t0 = Clock::now();
  const int n = sp.big_k - 1;
  SolveReport rep;
  rep.algorithm = "exhaustive";
  rep.sp = sp;
  rep.costs = cm;
  ThresholdPolicy tp{std::vector<int>(n), std::vector<int>(n)};
  double best = INFINITY;
  ThresholdPolicy best_tp = tp;
  long evals = 0;
  // Enumerate F ascending, then R ascending for each F.
  std::function<void(int)> enum_r = [&](int i) {
    if (i == n) {
      const double c = ScaCache::build(tp, sp, cm).cost;
      ++evals;
      if (c < best) {
        best = c;
        best_tp = tp;
      }
      return;
    }
    const int lo = i == 0 ? 0 : tp.r[i - 1] + 1;
    for (int v = lo; v <= tp.f[i]; ++v) {
      tp.r[i] = v;
      enum_r(i + 1);
    }
  };
  std::function<void(int)> enum_f = [&](int i) {
    if (i == n) {
      enum_r(0);
      return;
    }
    const int lo = std::max(i + 1, i == 0 ? 1 : tp.f[i - 1] + 1);
    const int hi = sp.big_b - n + i;
    for (int v = lo; v <= hi; ++v) {
      tp.f[i] = v;
      enum_f(i + 1);
    }
  };
  enum_f(0);
  rep.threshold_policy = best_tp;
  rep.cost = best;
  rep.evaluations = evals;
  rep.iterations = 1;
  rep.wall_seconds = seconds_since(t0);
  rep.cost_trace = {best};
  return rep;
}

ThresholdPolicy random_policy(const SystemParams& sp, uint64_t seed) {
  Philox rng(seed, 0x5eedULL);
  const int n = sp.big_k - 1;
  ThresholdPolicy tp;
  for (int i = 0; i < n; ++i) {
    const int k = i + 1;
    const int lo = std::max(k, i == 0 ? 1 : tp.f[i - 1] + 1);
    tp.f.push_back(static_cast<int>(rng.uniform_int(lo, sp.big_b - n + i)));
  }
  for (int i = 0; i < n; ++i) {
    const int lo = i == 0 ? 0 : tp.r[i - 1] + 1;
    tp.r.push_back(static_cast<int>(rng.uniform_int(lo, tp.f[i])));
  }
  return tp;
}

std::vector<double> mmk_stationary(int k, const SystemParams& sp) {
  if (k < 1 || k > sp.big_k) throw std::invalid_argument("level out of range");
  const int b = sp.big_b;
  const double rho = sp.rho();
  const double a = rho / k;
  // log of the unnormalised terms rho^m/m! (m <= k) and a^m k^k/k! (m > k).
  std::vector<double> logt(b + 1);
  for (int m = 0; m <= b; ++m)
    logt[m] = m <= k ? m * std::log(rho) - std::lgamma(m + 1.0)
                     : m * std::log(a) + k * std::log(static_cast<double>(k)) - std::lgamma(k + 1.0);
  const double scale = *std::max_element(logt.begin(), logt.end());
  // Normalisation: sum_{m<k} rho^m/m! + rho^k/k! * sum_{j=0}^{B-k} a^j.
  double norm = 0.0;
  for (int m = 0; m < k; ++m) norm += std::exp(logt[m] - scale);
  const int terms = b - k + 1;
  const double geom = std::abs(a - 1.0) < 1e-14 ? terms : std::expm1(terms * std::log(a)) / (a - 1.0);
  norm += std::exp(logt[k] - scale) * geom;
  std::vector<double> pi(b + 1);
  for (int m = 0; m <= b; ++m) pi[m] = std::exp(logt[m] - scale) / norm;
  return pi;
}

ThresholdPolicy mmk_thresholds(const SystemParams& sp, const CostModel& cm) {
  sp.validate();
  const int kk = sp.big_k, b = sp.big_b, n = kk - 1;
  std::vector<std::vector<double>> pi(kk + 1);
  for (int k = 1; k <= kk; ++k) pi[k] = mmk_stationary(k, sp);
  auto p = [&](int k, int m) { return m < 0 || m > b ? 0.0 : pi[k][m]; };
  auto c_level = [&](int k, int m) {
    return p(k, m) * (cm.holding(m) + k * cm.c_s) + p(k, b) * sp.lambda * cm.c_r;
  };
  auto c_act = [&](int k, int m) {  // C^A_{k+1}(m)
    return c_level(k + 1, m) + p(k, m - 1) * sp.lambda * cm.c_a;
  };
  auto c_deact = [&](int k, int m) {  // C^D_k(m)
    return c_level(k, m) + p(k + 1, m + 1) * (k + 1) * sp.mu * cm.c_d;
  };
  // When a scan finds no sign change the threshold is coerced to the top of
  // its feasible range.
  ThresholdPolicy tp;
  for (int k = 1; k <= n; ++k) {
    const int f_lo = std::max(k, k == 1 ? 1 : tp.f[k - 2] + 1);
    const int f_hi = b - n + (k - 1);
    int f = f_hi;
    for (int m = f_lo; m <= f_hi; ++m)
      if (c_level(k, m) - c_act(k, m) >= 0.0) {
        f = m;
        break;
      }
    tp.f.push_back(f);
    const int r_lo = k == 1 ? 0 : tp.r[k - 2] + 1;
    const int r_hi = f - 1;
    int r = std::max(r_lo, r_hi);
    for (int m = r_lo; m <= r_hi; ++m)
      if (c_level(k + 1, m) - c_deact(k, m) >= 0.0) {
        r = m;
        break;
      }
    tp.r.push_back(r);
  }
  return tp;
}

ThresholdPolicy initial_policy(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg) {
  switch (cfg.initializer) {
    case InitKind::LowestFeasible: return lowest_feasible_policy(sp);
    case InitKind::Random: return random_policy(sp, cfg.seed);
    case InitKind::Mmk: return mmk_thresholds(sp, cm);
  }
  return lowest_feasible_policy(sp);
}

namespace {

std::string variant_name(const std::string& base, const SearchConfig& cfg) {
  std::string name = base;
  if (cfg.initializer == InitKind::Mmk) name += "-MMK";
  if (cfg.evaluator == EvaluatorKind::AggregatedIncremental) name += "-Agg";
  return name;
}

struct Search {
  const SystemParams& sp;
  const SearchConfig& cfg;
  PolicyEvaluator eval;

  double cost(const ThresholdPolicy& tp) {
    const double c = eval.evaluate(tp);
    if (cfg.on_evaluate) cfg.on_evaluate(tp, c);
    return c;
  }
};

}  // namespace

SolveReport bpl(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg) {
  sp.validate();
  if (cfg.improvement_tol < 0.0) throw std::invalid_argument("improvement_tol must be >= 0");
  const auto t0 = Clock::now();
  Search s{sp, cfg, PolicyEvaluator(sp, cm, cfg.evaluator)};
  ThresholdPolicy tp = initial_policy(sp, cm, cfg);
  require_valid(tp, sp);
  double cost = s.cost(tp);
  s.eval.commit(tp);
  SolveReport rep;
  rep.algorithm = variant_name("BPL", cfg);
  rep.cost_trace.push_back(cost);
  const int n = sp.big_k - 1;

  // Scans one coordinate over its feasible range, keeping the best value.
  auto scan = [&](std::vector<int>& v, int i, int lo, int hi) {
    const int current = v[i];
    int best_v = current;
    double best = cost;
    for (int x = lo; x <= hi; ++x) {
      if (x == current) continue;
      v[i] = x;
      const double c = s.cost(tp);
      if (c < best - cfg.improvement_tol) {
        best = c;
        best_v = x;
      }
    }
    v[i] = best_v;
    if (best_v != current) {
      cost = best;
      s.eval.commit(tp);
      return true;
    }
    return false;
  };

  long sweeps = 0;
  while (sweeps < cfg.max_sweeps) {
    ++sweeps;
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      const int lo = std::max({i + 1, i == 0 ? 1 : tp.f[i - 1] + 1, tp.r[i]});
      const int hi = i + 1 < n ? tp.f[i + 1] - 1 : sp.big_b - 1;
      improved |= scan(tp.f, i, lo, hi);
    }
    for (int i = 0; i < n; ++i) {
      const int lo = i == 0 ? 0 : tp.r[i - 1] + 1;
      const int hi = i + 1 < n ? std::min(tp.f[i], tp.r[i + 1] - 1) : tp.f[i];
      improved |= scan(tp.r, i, lo, hi);
    }
    rep.cost_trace.push_back(cost);
    if (!improved) break;
  }
  rep.sp = sp;
  rep.costs = cm;
  rep.threshold_policy = tp;
  rep.cost = cost;
  rep.iterations = sweeps;
  rep.evaluations = s.eval.evaluations();
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

SolveReport nls(const SystemParams& sp, const CostModel& cm, const SearchConfig& cfg) {
  sp.validate();
  if (cfg.improvement_tol < 0.0) throw std::invalid_argument("improvement_tol must be >= 0");
  const auto t0 = Clock::now();
  Search s{sp, cfg, PolicyEvaluator(sp, cm, cfg.evaluator)};
  ThresholdPolicy tp = initial_policy(sp, cm, cfg);
  require_valid(tp, sp);
  double cost = s.cost(tp);
  s.eval.commit(tp);
  SolveReport rep;
  rep.algorithm = variant_name("NLS", cfg);
  rep.cost_trace.push_back(cost);
  const int n = sp.big_k - 1;
  long iters = 0;
  while (iters < cfg.max_sweeps) {
    ++iters;
    double best = cost;
    std::optional<ThresholdPolicy> best_tp;
    // Neighbourhood: every threshold moved by -1 or +1 (4(K-1) candidates).
    for (int which = 0; which < 2; ++which) {
      for (int i = 0; i < n; ++i) {
        for (int delta : {-1, 1}) {
          ThresholdPolicy cand = tp;
          (which == 0 ? cand.f : cand.r)[i] += delta;
          if (!validate_threshold_policy(cand, sp)) continue;
          const double c = s.cost(cand);
          if (c < best - cfg.improvement_tol) {
            best = c;
            best_tp = cand;
          }
        }
      }
    }
    if (!best_tp) break;
    tp = *best_tp;
    cost = best;
    s.eval.commit(tp);
    rep.cost_trace.push_back(cost);
  }
  rep.sp = sp;
  rep.costs = cm;
  rep.threshold_policy = tp;
  rep.cost = cost;
  rep.iterations = iters;
  rep.evaluations = s.eval.evaluations();
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

}  // namespace hyst
