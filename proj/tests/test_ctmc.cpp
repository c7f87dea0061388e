#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

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

// Reference model written directly from the four transition families:
// arrival within a level, arrival with level-up at F_k, departure within a
// level, departure with level-down at R_{k-1}+1.
struct DenseReference {
  std::vector<State> states;
  Eigen::MatrixXd q;
  Eigen::VectorXd pi;
  double cost = 0.0;
};

DenseReference dense_reference(const ThresholdPolicy& tp, const SystemParams& sp, const CostRates& cr) {
  const int kk = sp.big_k;
  auto lo = [&](int k) { return k == 1 ? 0 : tp.r[k - 2] + 1; };
  auto hi = [&](int k) { return k == kk ? sp.big_b : tp.f[k - 1]; };
  DenseReference ref;
  std::map<std::pair<int, int>, int> id;
  for (int k = 1; k <= kk; ++k)
    for (int m = lo(k); m <= hi(k); ++m) {
      id[{m, k}] = static_cast<int>(ref.states.size());
      ref.states.push_back({m, k});
    }
  const int n = static_cast<int>(ref.states.size());
  ref.q = Eigen::MatrixXd::Zero(n, n);
  auto add = [&](int from, int m, int k, double rate) {
    ref.q(from, id.at({m, k})) += rate;
    ref.q(from, from) -= rate;
  };
  for (int i = 0; i < n; ++i) {
    const auto [m, k] = ref.states[i];
    if (k < kk && m == hi(k)) add(i, m + 1, k + 1, sp.lambda);
    else if (m < sp.big_b) add(i, m + 1, k, sp.lambda);
    const double dep = sp.mu * std::min(m, k);
    if (k > 1 && m == lo(k)) add(i, m - 1, k - 1, dep);
    else if (m > 0) add(i, m - 1, k, dep);
  }
  Eigen::MatrixXd a = ref.q.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  ref.pi = a.fullPivLu().solve(rhs);
  for (int i = 0; i < n; ++i) {
    const auto [m, k] = ref.states[i];
    double c = cr.c_h * m + cr.c_s * k;
    if (k < kk && m == tp.f[k - 1]) c += cr.c_a * sp.lambda;
    if (k >= 2 && m == tp.r[k - 2] + 1) c += cr.c_d * sp.mu * std::min(m, k);
    if (k == kk && m == sp.big_b) c += cr.c_r * sp.lambda;
    ref.cost += ref.pi(i) * c;
  }
  return ref;
}

}  // namespace

TEST_CASE("state space layout") {
  const auto sp = params(3, 10, 2.0, 1.0);
  ThresholdPolicy tp{{3, 7}, {1, 4}};
  const auto chain = build_chain(tp, sp);
  // (F_1+1) + (F_2-R_1) + (B-R_2)
  CHECK(static_cast<int>(chain.states.size()) == 4 + 6 + 6);
  CHECK(chain.layout.size() == 16);
  CHECK(chain.states.front() == State{0, 1});
  CHECK(chain.states.back() == State{10, 3});
  CHECK(chain.layout.contains(7, 2));
  CHECK_FALSE(chain.layout.contains(8, 2));
  CHECK_FALSE(chain.layout.contains(1, 2));
  CHECK(chain.layout.index(2, 2) == 4);
  CHECK_THROWS_AS(build_chain({{3, 3}, {1, 2}}, sp), std::invalid_argument);
}

TEST_CASE("generator rows sum to zero and match the transition families") {
  const auto sp = params(3, 12, 3.0, 2.0);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto tp = random_policy(sp, seed);
    const auto chain = build_chain(tp, sp);
    const auto ref = dense_reference(tp, sp, CostRates{});
    REQUIRE(ref.states == chain.states);
    Eigen::MatrixXd q = Eigen::MatrixXd(chain.generator);
    CHECK((q - ref.q).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(q.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stationary distribution and cost match a dense solve") {
  const CostRates cr{1.5, 2.0, 0.7, 0.3, 4.0};
  for (auto [k, b, lambda, mu] : std::vector<std::tuple<int, int, double, double>>{
           {2, 6, 1.0, 1.0}, {3, 15, 5.0, 2.0}, {4, 20, 10.0, 1.0}, {5, 25, 0.5, 2.0}}) {
    const auto sp = params(k, b, lambda, mu);
    for (uint64_t seed = 0; seed < 5; ++seed) {
      const auto tp = random_policy(sp, seed);
      const auto chain = build_chain(tp, sp);
      const auto ref = dense_reference(tp, sp, cr);
      const auto exact = solve_stationary_exact(chain);
      const auto power = solve_stationary_direct(chain, 1e-13);
      double err_exact = 0.0, err_power = 0.0;
      for (size_t i = 0; i < exact.probs.size(); ++i) {
        err_exact = std::max(err_exact, std::abs(exact.probs[i] - ref.pi(i)));
        err_power = std::max(err_power, std::abs(power.probs[i] - ref.pi(i)));
      }
      CHECK(err_exact < 1e-12);
      CHECK(err_power < 1e-9);
      CHECK(expected_cost(chain, exact, cr) == doctest::Approx(ref.cost).epsilon(1e-11));
      CHECK(evaluate_policy_exact(tp, sp, cr) == doctest::Approx(ref.cost).epsilon(1e-11));
      double total = 0.0;
      for (double x : level_marginals(chain, exact)) total += x;
      CHECK(total == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("single server chain is the M/M/1/B queue") {
  const auto sp = params(1, 8, 1.0, 2.0);
  ThresholdPolicy tp;
  const auto chain = build_chain(tp, sp);
  const auto dist = solve_stationary_exact(chain);
  double norm = 0.0;
  for (int m = 0; m <= 8; ++m) norm += std::pow(0.5, m);
  for (int m = 0; m <= 8; ++m) CHECK(dist.probs[m] == doctest::Approx(std::pow(0.5, m) / norm));
  // Only rejections cost: c_r * lambda * P(m = B).
  CostRates cr{0, 0, 0, 0, 3.0};
  CHECK(expected_cost(chain, dist, cr) == doctest::Approx(3.0 * std::pow(0.5, 8) / norm));
}

TEST_CASE("state cost components") {
  const auto sp = params(3, 10, 2.0, 3.0);
  ThresholdPolicy tp{{3, 7}, {1, 4}};
  const CostModel cm(CostRates{1.0, 2.0, 5.0, 7.0, 11.0});
  CHECK(mc_state_cost(tp, sp, cm, 3, 1) == doctest::Approx(3 + 2 + 5 * 2.0));
  CHECK(mc_state_cost(tp, sp, cm, 2, 2) == doctest::Approx(2 + 4 + 7 * 3.0 * 2));
  CHECK(mc_state_cost(tp, sp, cm, 5, 3) == doctest::Approx(5 + 6 + 7 * 3.0 * 3));
  CHECK(mc_state_cost(tp, sp, cm, 10, 3) == doctest::Approx(10 + 6 + 11 * 2.0));
  CHECK(mc_state_cost(tp, sp, cm, 6, 2) == doctest::Approx(6 + 4));
}

TEST_CASE("CTMC cost equals the gain of the equivalent MDP decision rule") {
  const auto sp = params(4, 18, 4.0, 1.5);
  const CostRates cr{1.0, 3.0, 2.0, 1.0, 20.0};
  const auto mdp = build_mdp(sp, cr);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto tp = random_policy(sp, seed);
    CHECK(evaluate_policy_exact(tp, sp, cr) ==
          doctest::Approx(policy_gain(mdp, mdp_policy_from_mc(tp, sp))).epsilon(1e-9));
  }
}

TEST_CASE("power method honours its iteration budget") {
  const auto sp = params(3, 40, 10.0, 1.0);
  const auto chain = build_chain(lowest_feasible_policy(sp), sp);
  CHECK_THROWS_AS(solve_stationary_direct(chain, 1e-14, 3), IterationLimitError);
  long iters = 0;
  solve_stationary_direct(chain, 1e-8, 1000000, &iters);
  CHECK(iters > 3);
}

TEST_CASE("generator dump lists one triplet per nonzero") {
  const auto sp = params(2, 4, 1.0, 1.0);
  const auto chain = build_chain({{2}, {0}}, sp);
  std::ostringstream os;
  dump_generator(chain, os);
  std::istringstream in(os.str());
  int row, col, lines = 0;
  double rate, total = 0.0;
  while (in >> row >> col >> rate) {
    ++lines;
    total += rate;
  }
  CHECK(lines == chain.generator.nonZeros());
  CHECK(std::abs(total) < 1e-12);
}
