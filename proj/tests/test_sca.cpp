#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hysteresis/ctmc.hpp"
#include "hysteresis/heuristics.hpp"
#include "hysteresis/rng.hpp"
#include "hysteresis/sca.hpp"

using namespace hyst;

namespace {

SystemParams params(int big_k, int big_b, double lambda, double mu) {
  SystemParams sp;
  sp.lambda = lambda;
  sp.mu = mu;
  sp.big_k = big_k;
  sp.big_b = big_b;
  return sp;
}

double max_diff(const StationaryDistribution& a, const StationaryDistribution& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.probs.size(); ++i) d = std::max(d, std::abs(a.probs[i] - b.probs[i]));
  return d;
}

}  // namespace

TEST_CASE("closed form and power method agree on every micro-chain") {
  const CostRates cr{1, 2, 3, 4, 5};
  for (auto [k, b, lambda, mu] : std::vector<std::tuple<int, int, double, double>>{
           {3, 20, 2.0, 1.0}, {5, 40, 20.0, 0.5}, {8, 60, 0.5, 20.0}, {4, 12, 4.0, 1.0}}) {
    const auto sp = params(k, b, lambda, mu);
    for (uint64_t seed = 0; seed < 5; ++seed) {
      const auto tp = random_policy(sp, seed);
      for (int level = 1; level <= k; ++level) {
        const auto a = solve_micro(tp, sp, level, cr, MicroMethod::ClosedForm);
        const auto p = solve_micro(tp, sp, level, cr, MicroMethod::PowerMethod);
        REQUIRE(a.dist.size() == p.dist.size());
        double d = 0.0, total = 0.0;
        for (size_t i = 0; i < a.dist.size(); ++i) {
          d = std::max(d, std::abs(a.dist[i] - p.dist[i]));
          total += a.dist[i];
        }
        CHECK(d < 1e-10);
        CHECK(total == doctest::Approx(1.0));
        CHECK(a.level_cost == doctest::Approx(p.level_cost).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("single-state level has unit mass") {
  const auto sp = params(3, 10, 1.0, 1.0);
  ThresholdPolicy tp{{2, 3}, {2, 3}};  // level 2 spans [R_1+1, F_2] = [3, 3]
  const auto micro = solve_micro(tp, sp, 2, CostRates{});
  CHECK(micro.lo == 3);
  CHECK(micro.hi == 3);
  REQUIRE(micro.dist.size() == 1);
  CHECK(micro.prob(3) == doctest::Approx(1.0));
}

TEST_CASE("aggregated distribution equals the direct stationary distribution") {
  const CostRates cr{0.5, 2.0, 10.0, 5.0, 100.0};
  for (auto [k, b] : std::vector<std::pair<int, int>>{{3, 20}, {5, 40}, {8, 60}}) {
    for (uint64_t seed = 0; seed < 6; ++seed) {
      Philox rng(seed, 99);
      const auto sp = params(k, b, 0.5 + 20 * rng.uniform(), 0.5 + 20 * rng.uniform());
      const auto tp = random_policy(sp, seed);
      const auto chain = build_chain(tp, sp);
      const auto exact = solve_stationary_exact(chain);
      const auto agg = sca_distribution(tp, sp);
      REQUIRE(agg.states == exact.states);
      CHECK(max_diff(agg, exact) < 1e-10);

      std::vector<MicroChain> micros;
      for (int level = 1; level <= k; ++level) micros.push_back(solve_micro(tp, sp, level, cr));
      const auto macro = solve_macro(micros, sp);
      CHECK(aggregated_cost(micros, macro) == doctest::Approx(expected_cost(chain, exact, cr)).epsilon(1e-10));
      const auto marg = level_marginals(chain, exact);
      for (int level = 0; level < k; ++level) CHECK(macro.dist[level] == doctest::Approx(marg[level]).epsilon(1e-9));
    }
  }
}

TEST_CASE("macro chain is a birth-death chain over levels") {
  const auto sp = params(4, 20, 3.0, 1.0);
  const auto tp = random_policy(sp, 3);
  std::vector<MicroChain> micros;
  for (int level = 1; level <= 4; ++level) micros.push_back(solve_micro(tp, sp, level, CostRates{}));
  const auto macro = solve_macro(micros, sp);
  REQUIRE(macro.up_rates.size() == 3);
  REQUIRE(macro.down_rates.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(macro.up_rates[k] == doctest::Approx(sp.lambda * micros[k].prob(tp.f[k])));
    CHECK(macro.dist[k] * macro.up_rates[k] == doctest::Approx(macro.dist[k + 1] * macro.down_rates[k]));
  }
}

TEST_CASE("vanishing arrivals concentrate the macro chain on level 1") {
  const auto sp = params(3, 10, 1e-9, 1.0);
  const auto dist = sca_distribution(lowest_feasible_policy(sp), sp);
  CHECK(dist.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("incremental cost equals full recomputation along random moves") {
  const auto sp = params(5, 30, 6.0, 1.5);
  const CostModel cm(CostRates{1.0, 2.0, 3.0, 1.0, 50.0});
  auto cache = ScaCache::build(lowest_feasible_policy(sp), sp, cm);
  CHECK(cache.micro_solves == 5);
  Philox rng(11, 0);
  int accepted = 0;
  for (int step = 0; step < 300; ++step) {
    ThresholdChange ch;
    ch.kind = rng.uniform_int(0, 1) ? ThresholdKind::F : ThresholdKind::R;
    ch.index = static_cast<int>(rng.uniform_int(1, 4));
    const auto& vec = ch.kind == ThresholdKind::F ? cache.policy.f : cache.policy.r;
    ch.value = vec[ch.index - 1] + (rng.uniform_int(0, 1) ? 1 : -1);
    const auto candidate = apply_change(cache.policy, ch);
    if (!validate_threshold_policy(candidate, sp)) {
      const double before = cache.cost;
      CHECK_THROWS_AS(incremental_cost(cache, ch), std::invalid_argument);
      CHECK(cache.cost == before);
      continue;
    }
    auto next = incremental_cost(cache, ch);
    CHECK(next.policy == candidate);
    CHECK(next.micro_solves == 2);
    CHECK(std::abs(next.cost - evaluate_policy_exact(candidate, sp, cm)) < 1e-10);
    // Levels other than k and k+1 keep the same solved micro-chain.
    for (int level = 1; level <= 5; ++level)
      if (level != ch.index && level != ch.index + 1) CHECK(next.micros[level - 1] == cache.micros[level - 1]);
    cache = std::move(next);
    ++accepted;
  }
  CHECK(accepted > 50);
}

TEST_CASE("closed form stays accurate at extreme load ratios") {
  for (auto [lambda, mu] : std::vector<std::pair<double, double>>{{20.0, 0.5}, {0.5, 20.0}, {10.0, 1.0}}) {
    const auto sp = params(8, 60, lambda, mu);
    for (uint64_t seed = 0; seed < 40; ++seed) {
      const auto tp = random_policy(sp, seed);
      for (int level = 1; level <= 8; ++level) {
        const auto a = solve_micro(tp, sp, level, CostRates{});
        const auto ref = lu_stationary(micro_generator(tp, sp, level));
        double d = 0.0;
        for (size_t i = 0; i < ref.size(); ++i) d = std::max(d, std::abs(a.dist[i] - ref[i]));
        CHECK(d < 1e-11);
      }
    }
  }
}
