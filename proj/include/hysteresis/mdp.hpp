#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hysteresis/core.hpp"
#include "hysteresis/linalg.hpp"

namespace hyst {

// Uniformized average-cost MDP. States are indexed level-major,
// i = (k-1)*(B+1) + m; actions a in {-1,0,+1} are stored at slot a+1.
struct UniformizedMdp {
  struct Row {
    std::array<int, 3> to{};
    std::array<double, 3> p{};
    int n = 0;
  };

  SystemParams sp;
  CostModel cm;
  double unif_rate = 0.0;          // lambda + K*mu
  std::vector<Row> kernel;         // num_states * 3
  std::vector<double> stage_cost;  // num_states * 3, cost per uniformized stage

  int num_states() const { return sp.num_states(); }
  int index(int m, int k) const { return (k - 1) * (sp.big_b + 1) + m; }
  State state(int i) const { return {i % (sp.big_b + 1), i / (sp.big_b + 1) + 1}; }
  const Row& row(int i, int a) const { return kernel[static_cast<size_t>(i) * 3 + a + 1]; }
  double cost(int i, int a) const { return stage_cost[static_cast<size_t>(i) * 3 + a + 1]; }
  // +1 only below K, -1 only above level 1.
  bool admissible(int i, int a) const {
    const int k = state(i).k;
    return !(a == 1 && k >= sp.big_k) && !(a == -1 && k <= 1);
  }
};

struct ValueFunction {
  std::vector<double> values;  // relative values, per stage
  double gain = 0.0;           // average cost per unit time (stage gain * unif_rate)
  double stage_gain = 0.0;     // average cost per uniformized stage
};

enum class PiVariant { Plain, Adapted, DoubleLevel, Hysteresis };

std::string to_string(PiVariant v);

struct MdpSolveStats {
  long iterations = 0;          // VI/RVI sweeps, or PI improvement steps
  long evaluation_sweeps = 0;   // PI evaluation sweeps
  long action_evaluations = 0;  // Q(x,a) computations in improvement steps
  long improvement_steps = 0;   // PI improvement passes
  // Structured variants: unrestricted pass confirming the restricted optimum.
  long confirmation_evaluations = 0;
  long fallback_sweeps = 0;     // PI value-iteration sweeps after a multichain stall
  double residual = 0.0;        // final span
  bool converged = false;
};

struct MdpSolution {
  ValueFunction value;
  MdpPolicy policy;
  MdpSolveStats stats;
};

UniformizedMdp build_mdp(const SystemParams& sp, const CostModel& cm);

MdpSolution value_iteration(const UniformizedMdp& mdp, double eps = 1e-8, long max_iter = 10000000);

MdpSolution relative_value_iteration(const UniformizedMdp& mdp, double eps = 1e-8, long max_iter = 10000000,
                                     State reference = {0, 1});

// Modified policy iteration. The initial policy defaults to the
// communicating policy.
MdpSolution policy_iteration(const UniformizedMdp& mdp, PiVariant variant, double eps = 1e-8,
                             long max_iter = 100000, const MdpPolicy* initial = nullptr);

// Greedy policy for the given relative values (ties: 0, then -1, then +1).
MdpPolicy greedy_policy(const UniformizedMdp& mdp, const std::vector<double>& values);

// Induced transition matrix P_q - I restricted to the states reachable from
// (0,1); used for exact gain computation and class analysis.
SparseRowMatrix induced_generator(const UniformizedMdp& mdp, const MdpPolicy& policy, std::vector<int>* reachable);

// Exact stationary distribution over all states (zero on states not
// reachable from (0,1)). Throws std::runtime_error if several recurrent
// classes are reachable.
std::vector<double> policy_stationary(const UniformizedMdp& mdp, const MdpPolicy& policy);

// Long-run average cost per unit time of a policy from the induced chain.
double policy_gain(const UniformizedMdp& mdp, const MdpPolicy& policy);

// Closed communicating classes of the induced chain over all states.
std::vector<std::vector<State>> recurrent_classes(const UniformizedMdp& mdp, const MdpPolicy& policy);

std::optional<HysteresisThresholds> extract_hysteresis(const MdpPolicy& p, const SystemParams& sp);

// MDP-to-MC shift: F_k = L_{k+1} - 1, R_k = l_{k+1} - 1. Empty if a sentinel
// is present or the result violates the MC constraints.
std::optional<ThresholdPolicy> shift_to_mc(const HysteresisThresholds& ht, const SystemParams& sp);

// Communicating policy: deactivate at m = 0, activate at m = B, idle elsewhere.
MdpPolicy communicating_policy(const SystemParams& sp);

struct MultichainWitness {
  MdpPolicy policy;
  int pivot = 0;
  std::vector<std::vector<State>> classes;
};

// Multichain construction around a pivot level (default: 2, or 1 when K=2).
MultichainWitness check_multichain_witness(const SystemParams& sp, const CostModel& cm, int pivot = 0);

enum class ArrivalRegime { Medium, Low, High };

std::string to_string(ArrivalRegime r);

ArrivalRegime classify_arrival_regime(const SystemParams& sp, const HysteresisThresholds& optimal);

}  // namespace hyst
