#include "hysteresis/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hysteresis/mdp.hpp"

namespace hyst {

void SystemParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be > 0");
  if (big_k < 1) throw std::invalid_argument("big_k must be >= 1");
  if (big_b < big_k) throw std::invalid_argument("big_b must be >= big_k");
}

void CostRates::validate() const {
  for (double c : {c_h, c_s, c_a, c_d, c_r}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("cost rates must be finite and >= 0");
  }
}

void MdpPolicy::set(int m, int k, int a) {
  if (a < -1 || a > 1) throw std::invalid_argument("action must be -1, 0 or +1");
  if (a == 1 && k >= big_k_) throw std::invalid_argument("action +1 requires k < K");
  if (a == -1 && k <= 1) throw std::invalid_argument("action -1 requires k > 1");
  actions_[index(m, k)] = static_cast<int8_t>(a);
}

std::string to_string(PolicyClass c) {
  switch (c) {
    case PolicyClass::NonMonotone: return "NonMonotone";
    case PolicyClass::DoubleThreshold: return "DoubleThreshold";
    case PolicyClass::MonotoneHysteresis: return "MonotoneHysteresis";
    case PolicyClass::Isotone: return "Isotone";
    case PolicyClass::StrictlyIsotone: return "StrictlyIsotone";
  }
  return "?";
}

namespace {

// Returns an empty string when valid, otherwise the first violated constraint.
std::string violation(const ThresholdPolicy& tp, const SystemParams& sp) {
  const int n = sp.big_k - 1;
  std::ostringstream os;
  for (int i = 0; i < n; ++i) {
    const int k = i + 1;
    if (tp.f[i] < k) { os << "F_" << k << "=" << tp.f[i] << " < " << k; return os.str(); }
    if (i > 0 && tp.f[i] <= tp.f[i - 1]) { os << "F not strictly increasing at " << k; return os.str(); }
    if (i > 0 && tp.r[i] <= tp.r[i - 1]) { os << "R not strictly increasing at " << k; return os.str(); }
    if (tp.r[i] > tp.f[i]) { os << "R_" << k << " > F_" << k; return os.str(); }
  }
  if (n > 0) {
    if (tp.r[0] < 0) return "R_1 < 0";
    if (tp.f[n - 1] >= sp.big_b) { os << "F_" << n << " >= B"; return os.str(); }
  }
  return {};
}

void check_lengths(const ThresholdPolicy& tp, const SystemParams& sp) {
  const size_t n = static_cast<size_t>(sp.big_k - 1);
  if (tp.f.size() != n || tp.r.size() != n) {
    std::ostringstream os;
    os << "threshold vectors must have length K-1=" << n << " (got " << tp.f.size() << ", " << tp.r.size() << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

bool validate_threshold_policy(const ThresholdPolicy& tp, const SystemParams& sp) {
  check_lengths(tp, sp);
  return violation(tp, sp).empty();
}

void require_valid(const ThresholdPolicy& tp, const SystemParams& sp) {
  check_lengths(tp, sp);
  auto v = violation(tp, sp);
  if (!v.empty()) throw std::invalid_argument("invalid threshold policy: " + v);
}

ThresholdPolicy lowest_feasible_policy(const SystemParams& sp) {
  ThresholdPolicy tp;
  for (int k = 1; k < sp.big_k; ++k) {
    tp.f.push_back(k);
    tp.r.push_back(k - 1);
  }
  return tp;
}

double count_valid_policies(const SystemParams& sp) {
  // ways[f][r]: number of prefixes F_1..F_k, R_1..R_k ending with F_k=f, R_k=r.
  const int n = sp.big_k - 1;
  if (n == 0) return 1.0;
  const int b = sp.big_b;
  std::vector<double> ways(static_cast<size_t>(b) * b, 0.0);
  auto at = [b](std::vector<double>& w, int f, int r) -> double& { return w[static_cast<size_t>(f) * b + r]; };
  for (int f = 1; f < b; ++f)
    for (int r = 0; r <= f; ++r) at(ways, f, r) = 1.0;
  for (int k = 2; k <= n; ++k) {
    // prefix sums over f' < f and r' < r.
    std::vector<double> cum(static_cast<size_t>(b + 1) * (b + 1), 0.0);
    auto c = [b](std::vector<double>& w, int f, int r) -> double& { return w[static_cast<size_t>(f) * (b + 1) + r]; };
    for (int f = 0; f < b; ++f)
      for (int r = 0; r < b; ++r)
        c(cum, f + 1, r + 1) = at(ways, f, r) + c(cum, f, r + 1) + c(cum, f + 1, r) - c(cum, f, r);
    std::vector<double> next(ways.size(), 0.0);
    for (int f = k; f < b; ++f)
      for (int r = 1; r <= f; ++r) at(next, f, r) = c(cum, f, r);
    ways.swap(next);
  }
  double total = 0.0;
  for (double w : ways) total += w;
  return total;
}

MdpPolicy policy_from_thresholds(const HysteresisThresholds& ht, const SystemParams& sp) {
  const int kk = sp.big_k;
  if (ht.l.size() != static_cast<size_t>(kk - 1) || ht.big_l.size() != static_cast<size_t>(kk - 1))
    throw std::invalid_argument("hysteresis threshold vectors must have length K-1");
  MdpPolicy p(kk, sp.big_b);
  for (int k = 1; k <= kk; ++k) {
    for (int m = 0; m <= sp.big_b; ++m) {
      int a = 0;
      if (k < kk && m >= ht.big_l[k - 1]) a = 1;
      if (k > 1 && m < ht.l[k - 2]) a = -1;
      if (k < kk && k > 1 && m >= ht.big_l[k - 1] && m < ht.l[k - 2])
        throw std::invalid_argument("thresholds require both activation and deactivation in one state");
      p.set(m, k, a);
    }
  }
  return p;
}

HysteresisThresholds thresholds_from_mc(const ThresholdPolicy& tp) {
  HysteresisThresholds ht;
  for (size_t i = 0; i < tp.f.size(); ++i) {
    ht.big_l.push_back(tp.f[i] + 1);
    ht.l.push_back(tp.r[i] + 1);
  }
  return ht;
}

MdpPolicy mdp_policy_from_mc(const ThresholdPolicy& tp, const SystemParams& sp) {
  require_valid(tp, sp);
  return policy_from_thresholds(thresholds_from_mc(tp), sp);
}

PolicyClass classify_policy(const MdpPolicy& p, const SystemParams& sp) {
  const int kk = sp.big_k;
  const int b = sp.big_b;
  if (p.big_k() != kk || p.big_b() != b) throw std::invalid_argument("policy does not match system size");

  // Double-level: target level monotone in m (per level) and in k.
  for (int k = 1; k <= kk; ++k)
    for (int m = 1; m <= b; ++m)
      if (p.at(m, k) < p.at(m - 1, k)) return PolicyClass::NonMonotone;
  for (int k = 1; k < kk; ++k)
    for (int m = 0; m <= b; ++m)
      if (k + p.at(m, k) > k + 1 + p.at(m, k + 1)) return PolicyClass::NonMonotone;

  // Monotone hysteresis: q decreasing in k and l_k <= L_k, l_k <= L_{k+1}.
  for (int k = 1; k < kk; ++k)
    for (int m = 0; m <= b; ++m)
      if (p.at(m, k + 1) > p.at(m, k)) return PolicyClass::DoubleThreshold;
  auto ht = extract_hysteresis(p, sp);
  if (!ht) return PolicyClass::DoubleThreshold;

  // Isotone with finite thresholds.
  for (int v : ht->big_l)
    if (v > b) return PolicyClass::MonotoneHysteresis;

  // Strictly isotone: strict sequences starting above l_1 = L_1 = 0, and
  // expressible in the MC model (k < L_{k+1} <= B).
  for (int i = 0; i < kk - 1; ++i) {
    const int k = i + 1;
    const int prev_l = i == 0 ? 0 : ht->l[i - 1];
    const int prev_big_l = i == 0 ? 0 : ht->big_l[i - 1];
    if (ht->l[i] <= prev_l || ht->big_l[i] <= prev_big_l) return PolicyClass::Isotone;
    if (ht->big_l[i] <= k) return PolicyClass::Isotone;
  }
  return PolicyClass::StrictlyIsotone;
}

}  // namespace hyst
