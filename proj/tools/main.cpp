#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "hysteresis/bench.hpp"
#include "hysteresis/cloudcost.hpp"
#include "hysteresis/ctmc.hpp"
#include "hysteresis/heuristics.hpp"
#include "hysteresis/io.hpp"
#include "hysteresis/mdp.hpp"
#include "hysteresis/sca.hpp"
#include "hysteresis/sim.hpp"

using namespace hyst;

namespace {

struct Common {
  std::string params;
  std::string costs;
  std::string out;
  uint64_t seed = 0;
  int workers = 1;
  double tol = 1e-8;
  std::string format = "csv";
};

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

SystemParams load_params(const Common& c) {
  if (c.params.empty()) throw CLI::RequiredError("--params");
  auto sp = load_json_arg(c.params).get<SystemParams>();
  sp.validate();
  return sp;
}

CostRates load_costs(const Common& c) {
  if (c.costs.empty()) throw CLI::RequiredError("--costs");
  auto cr = load_json_arg(c.costs).get<CostRates>();
  cr.validate();
  return cr;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

std::vector<std::pair<int, int>> parse_sizes(const std::string& s) {
  std::vector<std::pair<int, int>> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw std::invalid_argument("size '" + item + "' must look like KxB");
    v.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
  }
  return v;
}

void add_common(CLI::App* app, Common& c, bool with_instance) {
  if (with_instance) {
    app->add_option("--params", c.params, "system parameters: JSON text or file");
    app->add_option("--costs", c.costs, "cost rates: JSON text or file");
  }
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
}

json mdp_report_json(const SolveReport& rep) {
  json j = report_to_json(rep);
  if (rep.thresholds) {
    j["regime"] = to_string(classify_arrival_regime(rep.sp, *rep.thresholds));
    if (rep.threshold_policy) j["shifted_mc_policy"] = *rep.threshold_policy;
  }
  if (rep.mdp_policy) j["policy_class"] = to_string(classify_policy(*rep.mdp_policy, rep.sp));
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hysteresis auto-scaling policies: MC heuristics, MDP solvers, benchmarks and simulation"};
  app.require_subcommand(1);

  Common common;

  // solve-mc
  auto* solve_mc = app.add_subcommand("solve-mc", "evaluate an MC threshold policy, or find the optimal one");
  add_common(solve_mc, common, true);
  std::string mc_policy, mc_method = "direct", generator_path;
  solve_mc->add_option("--policy", mc_policy, "threshold policy {\"f\":[..],\"r\":[..]} to evaluate");
  solve_mc->add_option("--method", mc_method, "evaluation: direct | power | sca")
      ->check(CLI::IsMember({"direct", "power", "sca"}));
  solve_mc->add_option("--dump-generator", generator_path, "write generator triplets (row col rate) here");

  // solve-mdp
  auto* solve_mdp = app.add_subcommand("solve-mdp", "solve the average-cost MDP");
  add_common(solve_mdp, common, true);
  std::string mdp_algorithm = "Hy-PI", policy_out;
  solve_mdp->add_option("--algorithm", mdp_algorithm, "VI | RVI | PI | PI-Adapted | DL-PI | Hy-PI")
      ->check(CLI::IsMember({"VI", "RVI", "PI", "PI-Adapted", "DL-PI", "Hy-PI"}));
  solve_mdp->add_option("--policy-out", policy_out, "write the optimal decision rule (m k action rows)");

  // heuristic
  auto* heuristic = app.add_subcommand("heuristic", "run one MC heuristic");
  add_common(heuristic, common, true);
  std::string heuristic_name;
  heuristic->add_option("name", heuristic_name, "exhaustive | BPL | BPL-Agg | BPL-MMK-Agg | NLS | NLS-Agg | "
                                                "NLS-MMK-Agg | MMK")
      ->required();

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "run algorithms on an instance grid");
  add_common(benchmark, common, false);
  std::string scenario = "A", algorithms_arg, details_path;
  int custom_k = 0, custom_b = 0;
  uint64_t sample = 0;
  bool full_grid = false, untie = false;
  benchmark->add_option("--scenario", scenario, "A | B | C | D | custom");
  benchmark->add_option("--k", custom_k, "K for the custom scenario");
  benchmark->add_option("--b", custom_b, "B for the custom scenario");
  benchmark->add_option("--algorithms", algorithms_arg, "comma-separated algorithm names");
  benchmark->add_option("--sample", sample, "number of seeded sampled instances");
  benchmark->add_flag("--full-grid", full_grid, "run every instance of the grid");
  benchmark->add_flag("--untie-switching", untie, "separate C_a and C_d axes (6^7 instances)");
  benchmark->add_option("--details", details_path, "per-instance CSV");
  benchmark->add_option("--format", common.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // highscale
  auto* highscale = app.add_subcommand("highscale", "Hy-PI timing ladder on large systems");
  add_common(highscale, common, false);
  std::string sizes_arg;
  double budget = 600.0;
  highscale->add_option("--sizes", sizes_arg, "comma-separated KxB list (default 3x20 .. 64x400)");
  highscale->add_option("--budget", budget, "total time budget in seconds");

  // concrete
  auto* concrete = app.add_subcommand("concrete", "SLA/energy preset sweeps");
  add_common(concrete, common, false);
  std::string model_id = "A", sweep = "n_sla", values_arg;
  double fixed = 50.0;
  concrete->add_option("--model", model_id, "preset A | B | C")->check(CLI::IsMember({"A", "B", "C"}));
  concrete->add_option("--sweep", sweep, "n_sla | lambda")->check(CLI::IsMember({"n_sla", "lambda"}));
  concrete->add_option("--values", values_arg, "comma-separated sweep values")->required();
  concrete->add_option("--fixed", fixed, "value of the other parameter (lambda or n_sla)");

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "discrete-event simulation of a policy");
  add_common(simulate_cmd, common, true);
  std::string sim_policy, sim_mdp_policy, trace_path;
  SimConfig sim_cfg;
  simulate_cmd->add_option("--policy", sim_policy, "MC threshold policy JSON");
  simulate_cmd->add_option("--mdp-policy", sim_mdp_policy, "MDP decision rule file (m k action rows)");
  simulate_cmd->add_option("--horizon", sim_cfg.horizon, "simulated time per replication");
  simulate_cmd->add_option("--warmup", sim_cfg.warmup, "discarded warm-up time");
  simulate_cmd->add_option("--replications", sim_cfg.replications, "independent replications");
  simulate_cmd->add_option("--trace", trace_path, "event trace of replication 0");

  CLI11_PARSE(app, argc, argv);

  try {
    Output out(common.out);
    std::ostream& os = out.stream();
    os << std::setprecision(12);

    if (*solve_mc) {
      const SystemParams sp = load_params(common);
      const CostModel cm(load_costs(common));
      SolveReport rep;
      if (mc_policy.empty()) {
        rep = run_algorithm("exhaustive", sp, cm, common.seed, common.tol);
      } else {
        const auto tp = load_json_arg(mc_policy).get<ThresholdPolicy>();
        require_valid(tp, sp);
        rep.algorithm = "evaluate-" + mc_method;
        rep.sp = sp;
        rep.costs = cm;
        rep.threshold_policy = tp;
        rep.thresholds = thresholds_from_mc(tp);
        rep.evaluations = 1;
        if (mc_method == "sca") {
          rep.cost = ScaCache::build(tp, sp, cm).cost;
        } else {
          const HysteresisChain chain = build_chain(tp, sp);
          const StationaryDistribution dist = mc_method == "direct"
                                                  ? solve_stationary_exact(chain)
                                                  : solve_stationary_direct(chain, common.tol);
          rep.cost = expected_cost(chain, dist, cm);
        }
      }
      if (!generator_path.empty() && rep.threshold_policy) {
        std::ofstream g(generator_path);
        dump_generator(build_chain(*rep.threshold_policy, sp), g);
      }
      os << report_to_json(rep).dump(2) << '\n';
    } else if (*solve_mdp) {
      const SystemParams sp = load_params(common);
      const CostModel cm(load_costs(common));
      const SolveReport rep = run_algorithm(mdp_algorithm, sp, cm, common.seed, common.tol);
      if (!policy_out.empty()) {
        std::ofstream p(policy_out);
        write_policy(*rep.mdp_policy, p);
      }
      os << mdp_report_json(rep).dump(2) << '\n';
    } else if (*heuristic) {
      if (is_mdp_algorithm(heuristic_name)) throw std::invalid_argument("use solve-mdp for MDP algorithms");
      const SystemParams sp = load_params(common);
      const CostModel cm(load_costs(common));
      os << report_to_json(run_algorithm(heuristic_name, sp, cm, common.seed, common.tol)).dump(2) << '\n';
    } else if (*benchmark) {
      InstanceGrid grid = scenario == "custom" ? InstanceGrid::custom(custom_k, custom_b)
                                               : InstanceGrid::for_scenario(scenario);
      grid.tie_switching = !untie;
      std::vector<std::string> algorithms;
      std::stringstream ss(algorithms_arg);
      for (std::string a; std::getline(ss, a, ',');)
        if (!a.empty()) algorithms.push_back(a);
      BenchmarkOptions opts;
      if (sample > 0) opts.sample = sample;
      opts.seed = common.seed;
      opts.full_grid = full_grid;
      opts.workers = common.workers;
      opts.tol = common.tol;
      const uint64_t n = opts.sample ? std::min(*opts.sample, grid.size()) : grid.size();
      std::cerr << "scenario " << grid.scenario << ": grid of " << grid.size() << " instances, running " << n
                << '\n';
      const BenchmarkResult res = run_benchmark(grid, algorithms, opts);
      if (common.format == "json") {
        json rows = json::array();
        for (const auto& r : res.rows)
          rows.push_back({{"algorithm", r.algorithm}, {"scenario", r.scenario}, {"instances", r.instances},
                          {"mean_wall_seconds", r.mean_wall_seconds}, {"pct_optimal", r.pct_optimal},
                          {"mean_evaluations", r.mean_evaluations}, {"mean_iterations", r.mean_iterations}});
        os << rows.dump(2) << '\n';
      } else {
        write_benchmark_csv(res, os);
      }
      if (!details_path.empty()) {
        std::ofstream d(details_path);
        write_details_csv(res, d);
      }
    } else if (*highscale) {
      const auto sizes = sizes_arg.empty() ? default_highscale_ladder() : parse_sizes(sizes_arg);
      const auto rows = run_highscale(sizes, budget, common.tol);
      write_highscale_csv(rows, os);
      for (const auto& r : rows)
        if (!r.converged) return 2;
    } else if (*concrete) {
      const auto pts = run_concrete(model_id, sweep == "n_sla", parse_list(values_arg), fixed, common.tol);
      write_concrete_csv(pts, os);
    } else if (*simulate_cmd) {
      const SystemParams sp = load_params(common);
      const CostModel cm(load_costs(common));
      if (sim_policy.empty() == sim_mdp_policy.empty())
        throw std::invalid_argument("give exactly one of --policy and --mdp-policy");
      SimPolicy policy;
      if (!sim_policy.empty()) {
        policy = load_json_arg(sim_policy).get<ThresholdPolicy>();
      } else {
        std::ifstream in(sim_mdp_policy);
        if (!in) throw std::invalid_argument("cannot open " + sim_mdp_policy);
        policy = read_policy(in, sp);
      }
      std::unique_ptr<std::ofstream> trace;
      if (!trace_path.empty()) {
        trace = std::make_unique<std::ofstream>(trace_path);
        sim_cfg.trace = trace.get();
      }
      sim_cfg.seed = common.seed;
      sim_cfg.workers = common.workers;
      const SimResult res = simulate(policy, sp, cm, sim_cfg);
      json j{{"mean_cost", res.mean_cost},
             {"half_width", res.half_width},
             {"replication_costs", res.replication_costs},
             {"events", res.events}};
      os << j.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
