#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyst {

// Arrival/service rates, server count K and buffer capacity B.
struct SystemParams {
  double lambda = 1.0;
  double mu = 1.0;
  int big_k = 1;
  int big_b = 1;

  double rho() const { return lambda / mu; }
  // Uniformization constant lambda + K*mu.
  double unif_rate() const { return lambda + big_k * mu; }
  // "Never activate" sentinel for activation thresholds.
  int inf() const { return big_b + 1; }
  int num_states() const { return (big_b + 1) * big_k; }

  void validate() const;
};

// The five abstract cost coefficients.
struct CostRates {
  double c_h = 0.0;
  double c_s = 0.0;
  double c_a = 0.0;
  double c_d = 0.0;
  double c_r = 0.0;

  void validate() const;
};

// Per-state cost structure shared by the CTMC, SCA and MDP pipelines.
// holding(m) = c_h * max(m - holding_offset, 0). The abstract model uses
// offset 0 and no static cost; the SLA model uses offset N_SLA.
struct CostModel {
  double c_h = 0.0;
  double holding_offset = 0.0;
  double c_s = 0.0;
  double c_a = 0.0;
  double c_d = 0.0;
  double c_r = 0.0;
  double c_static = 0.0;

  CostModel() = default;
  CostModel(const CostRates& cr)  // NOLINT: implicit on purpose
      : c_h(cr.c_h), c_s(cr.c_s), c_a(cr.c_a), c_d(cr.c_d), c_r(cr.c_r) {}

  double holding(int m) const {
    double excess = m - holding_offset;
    return excess > 0.0 ? c_h * excess : 0.0;
  }
};

// Activation thresholds F_1..F_{K-1} and deactivation thresholds R_1..R_{K-1}.
struct ThresholdPolicy {
  std::vector<int> f;
  std::vector<int> r;

  bool operator==(const ThresholdPolicy&) const = default;
};

struct State {
  int m = 0;
  int k = 1;

  bool operator==(const State&) const = default;
};

// Deterministic stationary decision rule q(m,k) in {-1,0,+1}, stored
// level-major: index (k-1)*(B+1)+m.
class MdpPolicy {
 public:
  MdpPolicy() = default;
  MdpPolicy(int big_k, int big_b)
      : big_k_(big_k), big_b_(big_b), actions_(static_cast<size_t>(big_k) * (big_b + 1), 0) {}

  int big_k() const { return big_k_; }
  int big_b() const { return big_b_; }
  int size() const { return static_cast<int>(actions_.size()); }

  int index(int m, int k) const { return (k - 1) * (big_b_ + 1) + m; }
  int at(int m, int k) const { return actions_[index(m, k)]; }
  void set(int m, int k, int a);

  int at_index(int i) const { return actions_[i]; }
  void set_index(int i, int a) { actions_[i] = static_cast<int8_t>(a); }

  bool operator==(const MdpPolicy&) const = default;

 private:
  int big_k_ = 0;
  int big_b_ = 0;
  std::vector<int8_t> actions_;
};

// Hysteresis thresholds: l holds l_2..l_K, big_l holds L_2..L_K.
// q(m,k) = +1 iff m >= L_{k+1}; q(m,k) = -1 iff m < l_k.
// Sentinels: L = B+1 means never activate, l = 0 means never deactivate.
struct HysteresisThresholds {
  std::vector<int> l;
  std::vector<int> big_l;

  bool operator==(const HysteresisThresholds&) const = default;
};

enum class PolicyClass { NonMonotone, DoubleThreshold, MonotoneHysteresis, Isotone, StrictlyIsotone };

std::string to_string(PolicyClass c);

// True iff tp satisfies the constraint set of the optimisation problem.
// Throws std::invalid_argument when the vectors do not have length K-1.
bool validate_threshold_policy(const ThresholdPolicy& tp, const SystemParams& sp);

// Throws std::invalid_argument with a description when tp is invalid.
void require_valid(const ThresholdPolicy& tp, const SystemParams& sp);

// Lowest feasible policy F_k = k, R_k = k-1.
ThresholdPolicy lowest_feasible_policy(const SystemParams& sp);

// Number of valid threshold policies (as a double; it grows quickly).
double count_valid_policies(const SystemParams& sp);

// Decision rule generated by hysteresis thresholds.
MdpPolicy policy_from_thresholds(const HysteresisThresholds& ht, const SystemParams& sp);

// Inverse of the MC shift: L_{k+1} = F_k + 1, l_{k+1} = R_k + 1.
HysteresisThresholds thresholds_from_mc(const ThresholdPolicy& tp);

// MdpPolicy reproducing the MC model's decisions (via thresholds_from_mc).
MdpPolicy mdp_policy_from_mc(const ThresholdPolicy& tp, const SystemParams& sp);

PolicyClass classify_policy(const MdpPolicy& p, const SystemParams& sp);

}  // namespace hyst
