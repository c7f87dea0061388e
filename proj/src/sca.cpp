#include "hysteresis/sca.hpp"

#include <algorithm>
#include <cmath>

namespace hyst {

namespace {

struct MicroShape {
  int lo, hi;
  bool fold_up;    // (F_k,k) -> (R_k,k) at rate lambda, k < K
  int up_target;   // R_k
  bool fold_down;  // (lo,k) -> (F_{k-1}+1,k) at rate mu*min(lo,k), k > 1
  int down_target; // F_{k-1}+1
};

MicroShape shape_of(const ThresholdPolicy& tp, const SystemParams& sp, int k) {
  MicroShape s{};
  s.lo = k == 1 ? 0 : tp.r[k - 2] + 1;
  s.hi = k == sp.big_k ? sp.big_b : tp.f[k - 1];
  s.fold_up = k < sp.big_k;
  s.up_target = s.fold_up ? tp.r[k - 1] : s.hi;
  s.fold_down = k > 1;
  s.down_target = s.fold_down ? tp.f[k - 2] + 1 : s.lo;
  return s;
}

// Closed form of the folded birth-death chain with two return arcs. With
// pi(lo) = 1, the cut equations read
//   d(m+1) pi(m+1) = lambda pi(m) + c_a 1{m < e} - c_b 1{m >= r},
// c_a = d(lo) (flow of the down-fold), c_b = lambda pi(hi) (up-fold).
// pi = alpha + c_b beta is linear in the unknown c_b; the up-fold balance
// c_b = lambda pi(hi) then fixes it without cancellation (alpha only adds,
// beta only subtracts). With c_b known, the net cut flux g(m) = c_a 1{m < e}
// - c_b 1{m >= r} is nonnegative up to some split s and nonpositive above
// it, so pi is rebuilt forward from lo up to s and backward from hi down to
// s+1: every step adds nonnegative terms.
std::vector<double> closed_form_dist(const MicroShape& s, const SystemParams& sp, int k) {
  const int n = s.hi - s.lo + 1;
  if (n == 1) return {1.0};
  const double lam = sp.lambda;
  auto d = [&](int m) { return sp.mu * std::min(m, k); };
  const int e = s.fold_down ? s.down_target : s.lo;
  const int r = s.up_target;
  const double c_a = s.fold_down ? d(s.lo) : 0.0;

  std::vector<double> alpha(n), beta(n);
  alpha[0] = 1.0;
  beta[0] = 0.0;
  for (int m = s.lo; m < s.hi; ++m) {
    const int i = m - s.lo;
    alpha[i + 1] = (lam * alpha[i] + (m < e ? c_a : 0.0)) / d(m + 1);
    beta[i + 1] = (lam * beta[i] - (s.fold_up && m >= r ? 1.0 : 0.0)) / d(m + 1);
  }
  const double c_b = s.fold_up ? lam * alpha[n - 1] / (1.0 - lam * beta[n - 1]) : 0.0;

  auto g = [&](int m) { return (m < e ? c_a : 0.0) - (s.fold_up && m >= r ? c_b : 0.0); };
  int split = s.lo;
  while (split < s.hi && g(split) >= 0.0) ++split;

  std::vector<double> pi(n);
  pi[0] = 1.0;
  for (int m = s.lo; m < split; ++m) pi[m - s.lo + 1] = (lam * pi[m - s.lo] + g(m)) / d(m + 1);
  if (split < s.hi) {
    pi[n - 1] = c_b / lam;
    for (int m = s.hi - 1; m > split; --m) pi[m - s.lo] = (d(m + 1) * pi[m - s.lo + 1] - g(m)) / lam;
  }

  double sum = 0.0;
  for (double v : pi) sum += v;
  for (double& v : pi) v /= sum;
  return pi;
}

bool usable(const std::vector<double>& pi) {
  for (double v : pi)
    if (!std::isfinite(v) || v < -1e-12) return false;
  return true;
}

double level_cost_of(const MicroChain& mc, const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm) {
  double c = 0.0;
  for (int m = mc.lo; m <= mc.hi; ++m) c += mc.prob(m) * mc_state_cost(tp, sp, cm, m, mc.level);
  return c;
}

}  // namespace

SparseRowMatrix micro_generator(const ThresholdPolicy& tp, const SystemParams& sp, int k) {
  const auto s = shape_of(tp, sp, k);
  const int n = s.hi - s.lo + 1;
  std::vector<Eigen::Triplet<double>> trips;
  auto add = [&](int from, int to, double rate) {
    if (from == to || rate == 0.0) return;
    trips.emplace_back(from - s.lo, to - s.lo, rate);
    trips.emplace_back(from - s.lo, from - s.lo, -rate);
  };
  for (int m = s.lo; m <= s.hi; ++m) {
    if (m < s.hi) add(m, m + 1, sp.lambda);
    else if (s.fold_up) add(m, s.up_target, sp.lambda);
    const double dep = sp.mu * std::min(m, k);
    if (m > s.lo) add(m, m - 1, dep);
    else if (s.fold_down) add(m, s.down_target, dep);
  }
  SparseRowMatrix g(n, n);
  g.setFromTriplets(trips.begin(), trips.end());
  g.makeCompressed();
  return g;
}

MicroChain solve_micro(const ThresholdPolicy& tp, const SystemParams& sp, int k, const CostModel& cm,
                       MicroMethod method) {
  if (k < 1 || k > sp.big_k) throw std::invalid_argument("level out of range");
  const auto s = shape_of(tp, sp, k);
  if (s.hi < s.lo) throw std::logic_error("empty micro-chain support");
  MicroChain mc;
  mc.level = k;
  mc.lo = s.lo;
  mc.hi = s.hi;
  if (method == MicroMethod::ClosedForm) {
    mc.dist = closed_form_dist(s, sp, k);
    if (!usable(mc.dist)) mc.dist = lu_stationary(micro_generator(tp, sp, k));
  } else {
    const double unif = 1.1 * (sp.lambda + k * sp.mu);
    mc.dist = power_stationary(micro_generator(tp, sp, k), unif, 1e-15, 10000000);
  }
  for (double& v : mc.dist) v = std::max(v, 0.0);
  mc.level_cost = level_cost_of(mc, tp, sp, cm);
  return mc;
}

namespace {

MacroChain macro_from(const std::vector<const MicroChain*>& micros, const SystemParams& sp) {
  const int kk = sp.big_k;
  if (static_cast<int>(micros.size()) != kk) throw std::invalid_argument("need one micro-chain per level");
  MacroChain mc;
  for (int k = 1; k < kk; ++k) mc.up_rates.push_back(sp.lambda * micros[k - 1]->prob(micros[k - 1]->hi));
  for (int k = 2; k <= kk; ++k) {
    const auto& m = *micros[k - 1];
    mc.down_rates.push_back(sp.mu * std::min(m.lo, k) * m.prob(m.lo));
  }
  // Birth-death product formula in log space.
  std::vector<double> logp(kk, 0.0);
  for (int k = 1; k < kk; ++k) {
    const double up = mc.up_rates[k - 1], down = mc.down_rates[k - 1];
    if (!(down > 0.0)) throw std::runtime_error("macro chain has a zero down-rate");
    logp[k] = up > 0.0 ? logp[k - 1] + std::log(up) - std::log(down) : -INFINITY;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  mc.dist.resize(kk);
  for (int k = 0; k < kk; ++k) {
    mc.dist[k] = std::exp(logp[k] - mx);
    sum += mc.dist[k];
  }
  for (double& v : mc.dist) v /= sum;
  return mc;
}

}  // namespace

MacroChain solve_macro(const std::vector<MicroChain>& micros, const SystemParams& sp) {
  std::vector<const MicroChain*> ptrs;
  for (const auto& m : micros) ptrs.push_back(&m);
  return macro_from(ptrs, sp);
}

StationaryDistribution sca_distribution(const ThresholdPolicy& tp, const SystemParams& sp, MicroMethod method) {
  sp.validate();
  require_valid(tp, sp);
  std::vector<MicroChain> micros;
  for (int k = 1; k <= sp.big_k; ++k) micros.push_back(solve_micro(tp, sp, k, CostModel{}, method));
  const auto macro = solve_macro(micros, sp);
  StationaryDistribution out;
  for (const auto& mc : micros) {
    for (int m = mc.lo; m <= mc.hi; ++m) {
      out.states.push_back({m, mc.level});
      out.probs.push_back(macro.dist[mc.level - 1] * mc.prob(m));
    }
  }
  return out;
}

double aggregated_cost(const std::vector<MicroChain>& micros, const MacroChain& macro) {
  double total = 0.0;
  for (size_t k = 0; k < micros.size(); ++k) total += macro.dist[k] * micros[k].level_cost;
  return total;
}

namespace {

void finish(ScaCache& c) {
  std::vector<const MicroChain*> ptrs;
  ptrs.reserve(c.micros.size());
  for (const auto& p : c.micros) ptrs.push_back(p.get());
  c.macro = macro_from(ptrs, c.sp);
  c.cost = 0.0;
  for (size_t k = 0; k < ptrs.size(); ++k) c.cost += c.macro.dist[k] * ptrs[k]->level_cost;
}

}  // namespace

ScaCache ScaCache::build(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm) {
  sp.validate();
  require_valid(tp, sp);
  ScaCache c{sp, cm, tp, {}, {}, 0.0, 0};
  for (int k = 1; k <= sp.big_k; ++k) c.micros.push_back(std::make_shared<const MicroChain>(solve_micro(tp, sp, k, cm)));
  c.micro_solves = sp.big_k;
  finish(c);
  return c;
}

ThresholdPolicy apply_change(const ThresholdPolicy& tp, const ThresholdChange& change) {
  ThresholdPolicy out = tp;
  auto& v = change.kind == ThresholdKind::F ? out.f : out.r;
  if (change.index < 1 || change.index > static_cast<int>(v.size()))
    throw std::invalid_argument("threshold index out of range");
  v[change.index - 1] = change.value;
  return out;
}

ScaCache incremental_cost(const ScaCache& cache, const ThresholdChange& change) {
  auto tp = apply_change(cache.policy, change);
  require_valid(tp, cache.sp);
  ScaCache c = cache;
  c.policy = tp;
  const int k = change.index;
  c.micros[k - 1] = std::make_shared<const MicroChain>(solve_micro(tp, c.sp, k, c.cm));
  c.micros[k] = std::make_shared<const MicroChain>(solve_micro(tp, c.sp, k + 1, c.cm));
  c.micro_solves = 2;
  finish(c);
  return c;
}

}  // namespace hyst
