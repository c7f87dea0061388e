#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hysteresis/core.hpp"
#include "hysteresis/report.hpp"

namespace hyst {

struct Instance {
  uint64_t index = 0;
  SystemParams sp;
  CostRates cr;
};

// Cartesian instance grid of the benchmark methodology. By default the
// activation and deactivation costs share one axis (C_a = C_d), which gives
// the 6^6 = 46656 instances per scenario.
struct InstanceGrid {
  std::vector<double> cost_values{0.5, 1, 2, 5, 10, 20};
  std::vector<double> c_r_values{1, 10, 100, 1000, 5000, 10000};
  std::vector<double> rate_values{0.5, 1, 2, 5, 10, 20};
  std::string scenario = "A";
  int big_k = 3;
  int big_b = 20;
  bool tie_switching = true;

  // A(3,20), B(5,40), C(8,60), D(16,100).
  static InstanceGrid for_scenario(const std::string& id);
  static InstanceGrid custom(int big_k, int big_b);

  uint64_t size() const;
  Instance instance(uint64_t index) const;
};

// count distinct indices drawn uniformly from [0, size), sorted ascending.
std::vector<uint64_t> sample_indices(uint64_t size, uint64_t count, uint64_t seed);

// MC: exhaustive, BPL, BPL-Agg, BPL-MMK-Agg, NLS, NLS-Agg, NLS-MMK-Agg, MMK.
// MDP: VI, RVI, PI, PI-Adapted, DL-PI, Hy-PI.
const std::vector<std::string>& known_algorithms();
bool is_mdp_algorithm(const std::string& name);

// Runs one algorithm on one instance. MDP reports carry the induced-chain
// gain as cost; seed drives the random initialisation of NLS variants.
SolveReport run_algorithm(const std::string& name, const SystemParams& sp, const CostModel& cm, uint64_t seed = 0,
                          double tol = 1e-8);

struct BenchmarkRow {
  std::string algorithm;
  std::string scenario;
  long instances = 0;
  double mean_wall_seconds = 0.0;
  double pct_optimal = 0.0;
  double mean_evaluations = 0.0;
  double mean_iterations = 0.0;
};

struct InstanceOutcome {
  uint64_t index = 0;
  std::string algorithm;
  double cost = 0.0;
  double reference = 0.0;
  bool optimal = false;
  long evaluations = 0;
  long iterations = 0;
  long improvement_steps = 0;
  double wall_seconds = 0.0;
  std::string regime;  // MDP rows: Low / Medium / High / NotHysteresis
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<InstanceOutcome> details;  // ordered by (instance index, algorithm order)
};

struct BenchmarkOptions {
  std::optional<uint64_t> sample;  // number of sampled instances
  uint64_t seed = 0;
  bool full_grid = false;          // required when sample is absent and the grid is large
  int workers = 1;
  double tol = 1e-8;
};

BenchmarkResult run_benchmark(const InstanceGrid& grid, const std::vector<std::string>& algorithms,
                              const BenchmarkOptions& opts);

void write_benchmark_csv(const BenchmarkResult& res, std::ostream& os);
void write_details_csv(const BenchmarkResult& res, std::ostream& os);

struct HighscaleRow {
  int big_k = 0;
  int big_b = 0;
  int states = 0;
  double seconds = 0.0;
  bool converged = false;
  long iterations = 0;
  double cost = 0.0;
  std::string note;
};

// Parameters used for the high-scale ladder: mu = 1, lambda = 0.6*K,
// (c_a, c_d, c_h, c_s, c_r) = (2, 2, 1, 1, 20).
SystemParams highscale_params(int big_k, int big_b);
CostRates highscale_costs();

std::vector<std::pair<int, int>> default_highscale_ladder();

std::vector<HighscaleRow> run_highscale(const std::vector<std::pair<int, int>>& sizes, double budget_seconds,
                                        double tol = 1e-8);

void write_highscale_csv(const std::vector<HighscaleRow>& rows, std::ostream& os);

struct ConcretePoint {
  std::string model;
  double lambda = 0.0;
  double n_sla = 0.0;
  double cost = 0.0;              // euro per hour
  int first_activation = 0;       // L_2: smallest m where level 1 activates (B+1 if never)
  double performance_cost = 0.0;  // SLA holding penalties + rejections
  double energy_cost = 0.0;       // running + switching + static
};

ConcretePoint solve_concrete(const std::string& model_id, double lambda, double n_sla, double tol = 1e-8);

// Sweeps n_sla at fixed lambda (sweep_n_sla = true) or lambda at fixed n_sla.
std::vector<ConcretePoint> run_concrete(const std::string& model_id, bool sweep_n_sla,
                                        const std::vector<double>& values, double fixed, double tol = 1e-8);

void write_concrete_csv(const std::vector<ConcretePoint>& pts, std::ostream& os);

}  // namespace hyst
