#include "hysteresis/ctmc.hpp"

#include <algorithm>

namespace hyst {

LevelLayout::LevelLayout(const ThresholdPolicy& tp, const SystemParams& sp)
    : big_k(sp.big_k), lo(sp.big_k + 1, 0), hi(sp.big_k + 1, 0), start(sp.big_k + 1, 0) {
  int offset = 0;
  for (int k = 1; k <= big_k; ++k) {
    lo[k] = k == 1 ? 0 : tp.r[k - 2] + 1;
    hi[k] = k == big_k ? sp.big_b : tp.f[k - 1];
    start[k] = offset;
    offset += hi[k] - lo[k] + 1;
  }
}

HysteresisChain build_chain(const ThresholdPolicy& tp, const SystemParams& sp) {
  sp.validate();
  require_valid(tp, sp);
  HysteresisChain chain{sp, tp, LevelLayout(tp, sp), {}, {}};
  const auto& lay = chain.layout;
  const int n = lay.size();
  chain.states.reserve(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 3);
  for (int k = 1; k <= sp.big_k; ++k) {
    for (int m = lay.lo[k]; m <= lay.hi[k]; ++m) {
      chain.states.push_back({m, k});
      const int i = lay.index(m, k);
      double out = 0.0;
      // Arrivals: within the level, or level-up at m = F_k.
      if (m < lay.hi[k]) {
        trips.emplace_back(i, lay.index(m + 1, k), sp.lambda);
        out += sp.lambda;
      } else if (k < sp.big_k) {
        trips.emplace_back(i, lay.index(m + 1, k + 1), sp.lambda);
        out += sp.lambda;
      }
      // Departures: within the level, or level-down at m = R_{k-1}+1.
      const double dep = sp.mu * std::min(m, k);
      if (m > lay.lo[k]) {
        trips.emplace_back(i, lay.index(m - 1, k), dep);
        out += dep;
      } else if (k > 1) {
        trips.emplace_back(i, lay.index(m - 1, k - 1), dep);
        out += dep;
      }
      trips.emplace_back(i, i, -out);
    }
  }
  chain.generator.resize(n, n);
  chain.generator.setFromTriplets(trips.begin(), trips.end());
  chain.generator.makeCompressed();
  return chain;
}

StationaryDistribution solve_stationary_direct(const HysteresisChain& chain, double tol, long max_iter,
                                               long* iterations) {
  auto pi = power_stationary(chain.generator, chain.sp.unif_rate(), tol, max_iter, iterations);
  return {chain.states, std::move(pi)};
}

StationaryDistribution solve_stationary_exact(const HysteresisChain& chain) {
  return {chain.states, lu_stationary(chain.generator)};
}

double mc_state_cost(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm, int m, int k) {
  double c = cm.holding(m) + cm.c_s * k + cm.c_static;
  if (k < sp.big_k && m == tp.f[k - 1]) c += cm.c_a * sp.lambda;
  if (k >= 2 && m == tp.r[k - 2] + 1) c += cm.c_d * sp.mu * std::min(m, k);
  if (m == sp.big_b && k == sp.big_k) c += cm.c_r * sp.lambda;
  return c;
}

double expected_cost(const HysteresisChain& chain, const StationaryDistribution& dist, const CostModel& cm) {
  double total = 0.0;
  for (size_t i = 0; i < dist.states.size(); ++i) {
    const auto& s = dist.states[i];
    total += dist.probs[i] * mc_state_cost(chain.policy, chain.sp, cm, s.m, s.k);
  }
  return total;
}

double evaluate_policy_exact(const ThresholdPolicy& tp, const SystemParams& sp, const CostModel& cm) {
  auto chain = build_chain(tp, sp);
  return expected_cost(chain, solve_stationary_exact(chain), cm);
}

std::vector<double> level_marginals(const HysteresisChain& chain, const StationaryDistribution& dist) {
  std::vector<double> out(chain.sp.big_k, 0.0);
  for (size_t i = 0; i < dist.states.size(); ++i) out[dist.states[i].k - 1] += dist.probs[i];
  return out;
}

void dump_generator(const HysteresisChain& chain, std::ostream& os) {
  for (int i = 0; i < chain.generator.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator e(chain.generator, i); e; ++e)
      os << e.row() << ' ' << e.col() << ' ' << e.value() << '\n';
}

}  // namespace hyst
