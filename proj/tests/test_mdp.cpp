#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hysteresis/ctmc.hpp"
#include "hysteresis/heuristics.hpp"
#include "hysteresis/mdp.hpp"

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

const CostRates kReferenceCosts{5.0, 5.0, 2.0, 2.0, 10.0};

MdpSolution solve_with(const UniformizedMdp& mdp, const std::string& name) {
  if (name == "VI") return value_iteration(mdp, 1e-10);
  if (name == "RVI") return relative_value_iteration(mdp, 1e-10);
  if (name == "PI") return policy_iteration(mdp, PiVariant::Plain, 1e-10);
  if (name == "PI-Adapted") return policy_iteration(mdp, PiVariant::Adapted, 1e-10);
  if (name == "DL-PI") return policy_iteration(mdp, PiVariant::DoubleLevel, 1e-10);
  return policy_iteration(mdp, PiVariant::Hysteresis, 1e-10);
}

const std::vector<std::string> kSolvers{"VI", "RVI", "PI", "PI-Adapted", "DL-PI", "Hy-PI"};

}  // namespace

TEST_CASE("uniformized kernel is stochastic and follows the dynamics") {
  const auto sp = params(3, 5, 2.0, 1.5);
  const auto mdp = build_mdp(sp, kReferenceCosts);
  CHECK(mdp.unif_rate == doctest::Approx(6.5));
  for (int i = 0; i < mdp.num_states(); ++i)
    for (int a = -1; a <= 1; ++a) {
      const auto& row = mdp.row(i, a);
      double total = 0.0;
      for (int j = 0; j < row.n; ++j) {
        CHECK(row.p[j] >= 0.0);
        total += row.p[j];
      }
      CHECK(total == doctest::Approx(1.0));
    }
  // From (2,1) with activation: arrival to (3,2), departures 2*mu to (1,2).
  const auto& row = mdp.row(mdp.index(2, 1), 1);
  double to_arrival = 0.0, to_departure = 0.0;
  for (int j = 0; j < row.n; ++j) {
    if (row.to[j] == mdp.index(3, 2)) to_arrival += row.p[j];
    if (row.to[j] == mdp.index(1, 2)) to_departure += row.p[j];
  }
  CHECK(to_arrival == doctest::Approx(2.0 / 6.5));
  CHECK(to_departure == doctest::Approx(3.0 / 6.5));
  CHECK(mdp.admissible(mdp.index(0, 1), 1));
  CHECK_FALSE(mdp.admissible(mdp.index(0, 1), -1));
  CHECK_FALSE(mdp.admissible(mdp.index(0, 3), 1));
  CHECK(mdp.state(mdp.index(4, 2)) == State{4, 2});
}

TEST_CASE("optimal gain equals the brute-force minimum over deterministic policies") {
  for (auto [lambda, mu] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {3.0, 1.0}, {0.4, 1.0}}) {
    const auto sp = params(2, 3, lambda, mu);
    const CostRates cr{1.0, 2.0, 1.5, 0.5, 8.0};
    const auto mdp = build_mdp(sp, cr);
    const int n = mdp.num_states();
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << n); ++mask) {
      MdpPolicy p(2, 3);
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) p.set_index(i, mdp.state(i).k == 1 ? 1 : -1);
      try {
        best = std::min(best, policy_gain(mdp, p));
      } catch (const std::runtime_error&) {
        // several recurrent classes reachable: gain is not a single number
      }
    }
    for (const auto& name : kSolvers) {
      CAPTURE(name);
      const auto sol = solve_with(mdp, name);
      CHECK(sol.stats.converged);
      CHECK(sol.value.gain == doctest::Approx(best).epsilon(1e-8));
      CHECK(policy_gain(mdp, sol.policy) == doctest::Approx(best).epsilon(1e-8));
    }
  }
}

TEST_CASE("all solvers agree on moderate instances") {
  for (auto [k, b, lambda, mu] : std::vector<std::tuple<int, int, double, double>>{
           {3, 20, 2.0, 1.0}, {5, 40, 20.0, 2.0}, {4, 30, 0.5, 5.0}}) {
    const auto sp = params(k, b, lambda, mu);
    const auto mdp = build_mdp(sp, CostRates{1.0, 2.0, 10.0, 5.0, 100.0});
    const double ref = policy_gain(mdp, value_iteration(mdp).policy);
    for (const auto& name : kSolvers) {
      CAPTURE(name);
      const auto sol = solve_with(mdp, name);
      CHECK(sol.value.gain == doctest::Approx(ref).epsilon(1e-7));
      CHECK(policy_gain(mdp, sol.policy) == doctest::Approx(ref).epsilon(1e-7));
    }
  }
}

TEST_CASE("structured policy iteration evaluates fewer actions per improvement step") {
  const auto sp = params(8, 60, 6.0, 1.0);
  const auto mdp = build_mdp(sp, CostRates{1.0, 2.0, 5.0, 5.0, 50.0});
  const auto pi = policy_iteration(mdp, PiVariant::Plain);
  const auto dl = policy_iteration(mdp, PiVariant::DoubleLevel);
  const auto hy = policy_iteration(mdp, PiVariant::Hysteresis);
  auto per_step = [](const MdpSolution& s) {
    return static_cast<double>(s.stats.action_evaluations) / s.stats.improvement_steps;
  };
  CHECK(per_step(hy) <= per_step(dl));
  CHECK(per_step(dl) <= per_step(pi));
  CHECK(hy.value.gain == doctest::Approx(pi.value.gain).epsilon(1e-8));
}

TEST_CASE("single server system has only the idle policy") {
  const auto sp = params(1, 10, 0.6, 1.0);
  const auto mdp = build_mdp(sp, CostRates{1.0, 1.0, 2.0, 2.0, 20.0});
  const auto sol = policy_iteration(mdp, PiVariant::Hysteresis);
  CHECK(sol.stats.converged);
  CHECK(sol.policy == MdpPolicy(1, 10));
  // M/M/1/10: holding E[m] + running 1 + rejections 20*lambda*P(B).
  double norm = 0.0, mean = 0.0;
  for (int m = 0; m <= 10; ++m) {
    norm += std::pow(0.6, m);
    mean += m * std::pow(0.6, m);
  }
  const double expected = mean / norm + 1.0 + 20.0 * 0.6 * std::pow(0.6, 10) / norm;
  CHECK(sol.value.gain == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("reference cases: gains, thresholds and regimes") {
  SUBCASE("medium arrivals") {
    const auto sp = params(16, 100, 500.0, 100.0);
    const auto mdp = build_mdp(sp, kReferenceCosts);
    const auto sol = value_iteration(mdp);
    CHECK(sol.value.gain == doctest::Approx(64.0513072887).epsilon(1e-6));
    CHECK(policy_gain(mdp, sol.policy) == doctest::Approx(64.0513072887).epsilon(1e-10));
    const auto ht = extract_hysteresis(sol.policy, sp);
    REQUIRE(ht);
    CHECK(classify_arrival_regime(sp, *ht) == ArrivalRegime::Low);
  }
  SUBCASE("low arrivals") {
    const auto sp = params(16, 100, 50.0, 100.0);
    const auto mdp = build_mdp(sp, kReferenceCosts);
    const auto sol = policy_iteration(mdp, PiVariant::Hysteresis);
    CHECK(sol.value.gain == doctest::Approx(9.99323).epsilon(1e-4));
    const auto ht = extract_hysteresis(sol.policy, sp);
    REQUIRE(ht);
    for (int k = 8; k < 15; ++k) CHECK(ht->big_l[k] == sp.inf());
    CHECK(classify_arrival_regime(sp, *ht) == ArrivalRegime::Low);
    CHECK_FALSE(shift_to_mc(*ht, sp));
  }
  SUBCASE("high arrivals") {
    const auto sp = params(16, 100, 1000.0, 100.0);
    const auto mdp = build_mdp(sp, kReferenceCosts);
    const auto sol = policy_iteration(mdp, PiVariant::Hysteresis);
    CHECK(policy_gain(mdp, sol.policy) == doctest::Approx(119.754296266).epsilon(1e-10));
    const auto ht = extract_hysteresis(sol.policy, sp);
    REQUIRE(ht);
    for (int k = 0; k < 12; ++k) CHECK(ht->l[k] == 0);
    CHECK(classify_arrival_regime(sp, *ht) == ArrivalRegime::High);
  }
}

TEST_CASE("hysteresis extraction round-trips and the shift reproduces the MC cost") {
  const auto sp = params(4, 20, 5.0, 1.0);
  const CostRates cr{1.0, 2.0, 3.0, 1.0, 40.0};
  const auto mdp = build_mdp(sp, cr);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto tp = random_policy(sp, seed);
    const auto p = mdp_policy_from_mc(tp, sp);
    const auto ht = extract_hysteresis(p, sp);
    REQUIRE(ht);
    CHECK(*ht == thresholds_from_mc(tp));
    const auto back = shift_to_mc(*ht, sp);
    REQUIRE(back);
    CHECK(*back == tp);
    CHECK(policy_gain(mdp, p) == doctest::Approx(evaluate_policy_exact(tp, sp, cr)).epsilon(1e-9));
  }
  MdpPolicy ping(2, 5);
  ping.set(2, 1, 1);  // activates at 2 only
  CHECK_FALSE(extract_hysteresis(ping, params(2, 5, 1, 1)));
}

TEST_CASE("greedy policy prefers idling on ties") {
  const auto sp = params(3, 6, 1.0, 1.0);
  const auto mdp = build_mdp(sp, CostRates{});
  const std::vector<double> flat(mdp.num_states(), 0.0);
  CHECK(greedy_policy(mdp, flat) == MdpPolicy(3, 6));
}

TEST_CASE("communicating construction and multichain witnesses") {
  const CostRates cr{1, 1, 1, 1, 1};
  for (int k : {2, 3, 5}) {
    const auto sp = params(k, 10, 2.0, 1.0);
    const auto mdp = build_mdp(sp, cr);
    const auto classes = recurrent_classes(mdp, communicating_policy(sp));
    REQUIRE(classes.size() == 1);
    CHECK(static_cast<int>(classes[0].size()) == sp.num_states());
  }
  const auto w3 = check_multichain_witness(params(3, 10, 2.0, 1.0), cr);
  CHECK(w3.classes.size() >= 3);
  const auto w2 = check_multichain_witness(params(2, 10, 2.0, 1.0), cr);
  CHECK(w2.classes.size() == 2);
  const auto mdp3 = build_mdp(params(3, 10, 2.0, 1.0), cr);
  CHECK(recurrent_classes(mdp3, w3.policy).size() == w3.classes.size());
}

TEST_CASE("stationary distribution of an induced chain") {
  const auto sp = params(3, 12, 4.0, 1.0);
  const auto mdp = build_mdp(sp, kReferenceCosts);
  const auto sol = policy_iteration(mdp, PiVariant::Hysteresis);
  const auto pi = policy_stationary(mdp, sol.policy);
  double total = 0.0;
  for (double x : pi) total += x;
  CHECK(total == doctest::Approx(1.0));
  const auto w = check_multichain_witness(params(3, 10, 2.0, 1.0), kReferenceCosts);
  CHECK_NOTHROW(policy_stationary(build_mdp(params(3, 10, 2.0, 1.0), kReferenceCosts), w.policy));
}

TEST_CASE("iteration budgets are reported") {
  const auto sp = params(5, 40, 4.0, 1.0);
  const auto mdp = build_mdp(sp, kReferenceCosts);
  try {
    value_iteration(mdp, 1e-12, 5);
    FAIL("expected an iteration limit error");
  } catch (const IterationLimitError& e) {
    CHECK(e.iterations() == 5);
    CHECK(e.residual() > 1e-12);
  }
}
