#include "hysteresis/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <stdexcept>
#include <thread>

#include "hysteresis/cloudcost.hpp"
#include "hysteresis/heuristics.hpp"
#include "hysteresis/mdp.hpp"
#include "hysteresis/rng.hpp"

namespace hyst {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_cost(double cost, double reference) {
  return std::abs(cost - reference) <= 1e-6 * std::max(std::abs(reference), 1e-12);
}

constexpr uint64_t kSampleStream = 0x5a3b1e;

}  // namespace

InstanceGrid InstanceGrid::for_scenario(const std::string& id) {
  InstanceGrid g;
  g.scenario = id;
  if (id == "A") {
    g.big_k = 3, g.big_b = 20;
  } else if (id == "B") {
    g.big_k = 5, g.big_b = 40;
  } else if (id == "C") {
    g.big_k = 8, g.big_b = 60;
  } else if (id == "D") {
    g.big_k = 16, g.big_b = 100;
  } else {
    throw std::invalid_argument("unknown scenario '" + id + "' (expected A, B, C or D)");
  }
  return g;
}

InstanceGrid InstanceGrid::custom(int big_k, int big_b) {
  if (big_k < 1 || big_b < big_k) throw std::invalid_argument("custom scenario needs 1 <= K <= B");
  InstanceGrid g;
  g.scenario = "custom";
  g.big_k = big_k;
  g.big_b = big_b;
  return g;
}

uint64_t InstanceGrid::size() const {
  const uint64_t r = rate_values.size(), c = cost_values.size();
  uint64_t n = r * r * c * c * c * c_r_values.size();
  if (!tie_switching) n *= c;
  return n;
}

Instance InstanceGrid::instance(uint64_t index) const {
  if (index >= size()) throw std::out_of_range("instance index out of range");
  // Mixed radix, last axis fastest: lambda, mu, c_h, c_s, c_a, [c_d], c_r.
  Instance inst;
  inst.index = index;
  uint64_t rest = index;
  auto take = [&rest](const std::vector<double>& axis) {
    const double v = axis[rest % axis.size()];
    rest /= axis.size();
    return v;
  };
  inst.cr.c_r = take(c_r_values);
  const double c_d = tie_switching ? 0.0 : take(cost_values);
  inst.cr.c_a = take(cost_values);
  inst.cr.c_d = tie_switching ? inst.cr.c_a : c_d;
  inst.cr.c_s = take(cost_values);
  inst.cr.c_h = take(cost_values);
  inst.sp.mu = take(rate_values);
  inst.sp.lambda = take(rate_values);
  inst.sp.big_k = big_k;
  inst.sp.big_b = big_b;
  return inst;
}

std::vector<uint64_t> sample_indices(uint64_t size, uint64_t count, uint64_t seed) {
  std::vector<uint64_t> out;
  if (count >= size) {
    out.resize(size);
    for (uint64_t i = 0; i < size; ++i) out[i] = i;
    return out;
  }
  // Floyd's algorithm: exactly count draws, no rejection loop.
  Philox rng(seed, kSampleStream);
  std::set<uint64_t> chosen;
  for (uint64_t j = size - count; j < size; ++j) {
    const uint64_t t = rng.uniform_int(0, j);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  return out;
}

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"exhaustive", "BPL", "BPL-Agg", "BPL-MMK-Agg", "NLS", "NLS-Agg",
                                              "NLS-MMK-Agg", "MMK", "VI", "RVI", "PI", "PI-Adapted",
                                              "DL-PI", "Hy-PI"};
  return names;
}

bool is_mdp_algorithm(const std::string& name) {
  return name == "VI" || name == "RVI" || name == "PI" || name == "PI-Adapted" || name == "DL-PI" ||
         name == "Hy-PI";
}

namespace {

SolveReport run_mdp(const std::string& name, const SystemParams& sp, const CostModel& cm, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  const UniformizedMdp mdp = build_mdp(sp, cm);
  MdpSolution sol;
  if (name == "VI") sol = value_iteration(mdp, tol);
  else if (name == "RVI") sol = relative_value_iteration(mdp, tol);
  else if (name == "PI") sol = policy_iteration(mdp, PiVariant::Plain, tol);
  else if (name == "PI-Adapted") sol = policy_iteration(mdp, PiVariant::Adapted, tol);
  else if (name == "DL-PI") sol = policy_iteration(mdp, PiVariant::DoubleLevel, tol);
  else sol = policy_iteration(mdp, PiVariant::Hysteresis, tol);
  SolveReport rep;
  rep.wall_seconds = seconds_since(t0);
  rep.algorithm = name;
  rep.sp = sp;
  rep.costs = cm;
  rep.iterations = sol.stats.iterations;
  rep.evaluations = sol.stats.action_evaluations;
  rep.improvement_steps = sol.stats.improvement_steps;
  rep.converged = sol.stats.converged;
  try {
    rep.cost = policy_gain(mdp, sol.policy);
  } catch (const std::runtime_error&) {
    rep.cost = sol.value.gain;  // several reachable recurrent classes
  }
  rep.thresholds = extract_hysteresis(sol.policy, sp);
  if (rep.thresholds) rep.threshold_policy = shift_to_mc(*rep.thresholds, sp);
  rep.mdp_policy = std::move(sol.policy);
  return rep;
}

}  // namespace

SolveReport run_algorithm(const std::string& name, const SystemParams& sp, const CostModel& cm, uint64_t seed,
                          double tol) {
  if (is_mdp_algorithm(name)) return run_mdp(name, sp, cm, tol);
  SolveReport rep;
  if (name == "exhaustive") {
    rep = exhaustive_search(sp, cm);
  } else if (name == "MMK") {
    const auto t0 = std::chrono::steady_clock::now();
    PolicyEvaluator eval(sp, cm, EvaluatorKind::Direct);
    ThresholdPolicy tp = mmk_thresholds(sp, cm);
    rep.cost = eval.evaluate(tp);
    rep.threshold_policy = std::move(tp);
    rep.sp = sp;
    rep.costs = cm;
    rep.evaluations = 1;
    rep.wall_seconds = seconds_since(t0);
  } else {
    struct Variant {
      const char* name;
      bool is_bpl;
      EvaluatorKind evaluator;
      InitKind init;
    };
    static const Variant variants[] = {
        {"BPL", true, EvaluatorKind::Direct, InitKind::LowestFeasible},
        {"BPL-Agg", true, EvaluatorKind::AggregatedIncremental, InitKind::LowestFeasible},
        {"BPL-MMK-Agg", true, EvaluatorKind::AggregatedIncremental, InitKind::Mmk},
        {"NLS", false, EvaluatorKind::Direct, InitKind::Random},
        {"NLS-Agg", false, EvaluatorKind::AggregatedIncremental, InitKind::Random},
        {"NLS-MMK-Agg", false, EvaluatorKind::AggregatedIncremental, InitKind::Mmk},
    };
    auto it = std::find_if(std::begin(variants), std::end(variants), [&](const Variant& v) { return name == v.name; });
    if (it == std::end(variants)) throw std::invalid_argument("unknown algorithm '" + name + "'");
    SearchConfig cfg;
    cfg.seed = seed;
    cfg.evaluator = it->evaluator;
    cfg.initializer = it->init;
    const bool is_bpl = it->is_bpl;
    rep = is_bpl ? bpl(sp, cm, cfg) : nls(sp, cm, cfg);
  }
  rep.algorithm = name;
  if (rep.threshold_policy) rep.thresholds = thresholds_from_mc(*rep.threshold_policy);
  return rep;
}

BenchmarkResult run_benchmark(const InstanceGrid& grid, const std::vector<std::string>& algorithms,
                              const BenchmarkOptions& opts) {
  for (const auto& a : algorithms)
    if (std::find(known_algorithms().begin(), known_algorithms().end(), a) == known_algorithms().end())
      throw std::invalid_argument("unknown algorithm '" + a + "'");
  BenchmarkResult res;
  if (algorithms.empty()) return res;

  const uint64_t total = grid.size();
  if (!opts.sample && !opts.full_grid && total > 1000)
    throw std::invalid_argument("grid has " + std::to_string(total) +
                                " instances; pass a sample size or request the full grid explicitly");
  const std::vector<uint64_t> indices =
      opts.sample ? sample_indices(total, *opts.sample, opts.seed) : sample_indices(total, total, 0);

  bool any_mc = false, any_mdp = false, has_exhaustive = false;
  for (const auto& a : algorithms) {
    if (is_mdp_algorithm(a)) any_mdp = true;
    else any_mc = true;
    if (a == "exhaustive") has_exhaustive = true;
  }
  const bool exhaustive_reference = any_mc && (grid.scenario == "A" || has_exhaustive);

  std::vector<std::vector<InstanceOutcome>> per_instance(indices.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t n = next++; n < indices.size(); n = next++) {
      const Instance inst = grid.instance(indices[n]);
      const CostModel cm(inst.cr);
      const uint64_t seed = opts.seed * 0x9e3779b97f4a7c15ULL + inst.index;
      std::vector<SolveReport> reports;
      for (const auto& a : algorithms) reports.push_back(run_algorithm(a, inst.sp, cm, seed, opts.tol));

      double mdp_ref = 0.0, mc_ref = 0.0;
      std::string regime = "NotHysteresis";
      if (any_mdp) {
        auto it = std::find(algorithms.begin(), algorithms.end(), "VI");
        const SolveReport vi = it != algorithms.end() ? reports[it - algorithms.begin()]
                                                      : run_mdp("VI", inst.sp, cm, opts.tol);
        mdp_ref = vi.cost;
        if (vi.thresholds) regime = to_string(classify_arrival_regime(inst.sp, *vi.thresholds));
      }
      if (any_mc) {
        if (exhaustive_reference) {
          auto it = std::find(algorithms.begin(), algorithms.end(), "exhaustive");
          mc_ref = it != algorithms.end() ? reports[it - algorithms.begin()].cost
                                          : exhaustive_search(inst.sp, cm).cost;
        } else {
          mc_ref = std::numeric_limits<double>::infinity();
          for (size_t i = 0; i < algorithms.size(); ++i)
            if (!is_mdp_algorithm(algorithms[i])) mc_ref = std::min(mc_ref, reports[i].cost);
        }
      }
      auto& out = per_instance[n];
      for (size_t i = 0; i < algorithms.size(); ++i) {
        InstanceOutcome o;
        o.index = inst.index;
        o.algorithm = algorithms[i];
        o.cost = reports[i].cost;
        const bool mdp = is_mdp_algorithm(algorithms[i]);
        o.reference = mdp ? mdp_ref : mc_ref;
        o.optimal = same_cost(o.cost, o.reference);
        o.evaluations = reports[i].evaluations;
        o.iterations = reports[i].iterations;
        o.improvement_steps = reports[i].improvement_steps;
        o.wall_seconds = reports[i].wall_seconds;
        if (mdp) o.regime = regime;
        out.push_back(std::move(o));
      }
    }
  };
  const int threads = std::clamp(opts.workers, 1, static_cast<int>(std::max<size_t>(indices.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (auto& v : per_instance)
    for (auto& o : v) res.details.push_back(std::move(o));

  for (size_t a = 0; a < algorithms.size(); ++a) {
    BenchmarkRow row;
    row.algorithm = algorithms[a];
    row.scenario = grid.scenario;
    long optimal = 0;
    for (size_t n = 0; n < per_instance.size(); ++n) {
      const auto& o = res.details[n * algorithms.size() + a];
      ++row.instances;
      row.mean_wall_seconds += o.wall_seconds;
      row.mean_evaluations += static_cast<double>(o.evaluations);
      row.mean_iterations += static_cast<double>(o.iterations);
      if (o.optimal) ++optimal;
    }
    if (row.instances > 0) {
      const double n = static_cast<double>(row.instances);
      row.mean_wall_seconds /= n;
      row.mean_evaluations /= n;
      row.mean_iterations /= n;
      row.pct_optimal = 100.0 * static_cast<double>(optimal) / n;
    }
    res.rows.push_back(row);
  }
  return res;
}

void write_benchmark_csv(const BenchmarkResult& res, std::ostream& os) {
  os << "algorithm,scenario,instances,mean_wall_seconds,pct_optimal,mean_evaluations,mean_iterations\n";
  os << std::setprecision(10);
  for (const auto& r : res.rows)
    os << r.algorithm << ',' << r.scenario << ',' << r.instances << ',' << r.mean_wall_seconds << ','
       << r.pct_optimal << ',' << r.mean_evaluations << ',' << r.mean_iterations << '\n';
}

void write_details_csv(const BenchmarkResult& res, std::ostream& os) {
  os << "index,algorithm,cost,reference,optimal,evaluations,iterations,improvement_steps,wall_seconds,regime\n";
  os << std::setprecision(15);
  for (const auto& o : res.details)
    os << o.index << ',' << o.algorithm << ',' << o.cost << ',' << o.reference << ',' << (o.optimal ? 1 : 0) << ','
       << o.evaluations << ',' << o.iterations << ',' << o.improvement_steps << ',' << o.wall_seconds << ',' << o.regime << '\n';
}

SystemParams highscale_params(int big_k, int big_b) {
  SystemParams sp;
  sp.mu = 1.0;
  sp.lambda = 0.6 * big_k;
  sp.big_k = big_k;
  sp.big_b = big_b;
  return sp;
}

CostRates highscale_costs() {
  CostRates cr;
  cr.c_a = 2.0;
  cr.c_d = 2.0;
  cr.c_h = 1.0;
  cr.c_s = 1.0;
  cr.c_r = 20.0;
  return cr;
}

std::vector<std::pair<int, int>> default_highscale_ladder() {
  return {{3, 20}, {5, 40}, {8, 60}, {16, 100}, {32, 200}, {64, 400}};
}

std::vector<HighscaleRow> run_highscale(const std::vector<std::pair<int, int>>& sizes, double budget_seconds,
                                        double tol) {
  std::vector<HighscaleRow> rows;
  double used = 0.0;
  for (const auto& [big_k, big_b] : sizes) {
    HighscaleRow row;
    row.big_k = big_k;
    row.big_b = big_b;
    const SystemParams sp = highscale_params(big_k, big_b);
    sp.validate();
    row.states = sp.num_states();
    if (used >= budget_seconds) {
      row.note = "skipped: budget exceeded";
      rows.push_back(row);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const UniformizedMdp mdp = build_mdp(sp, highscale_costs());
    const MdpSolution sol = policy_iteration(mdp, PiVariant::Hysteresis, tol);
    row.seconds = seconds_since(t0);
    used += row.seconds;
    row.iterations = sol.stats.iterations;
    row.cost = sol.value.gain;
    row.converged = sol.stats.converged && used <= budget_seconds;
    if (!sol.stats.converged) row.note = "not converged";
    else if (used > budget_seconds) row.note = "budget exceeded";
    rows.push_back(row);
  }
  return rows;
}

void write_highscale_csv(const std::vector<HighscaleRow>& rows, std::ostream& os) {
  os << "big_k,big_b,states,seconds,converged,iterations,cost,note\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << r.big_k << ',' << r.big_b << ',' << r.states << ',' << r.seconds << ',' << (r.converged ? 1 : 0) << ','
       << r.iterations << ',' << r.cost << ',' << r.note << '\n';
}

ConcretePoint solve_concrete(const std::string& model_id, double lambda, double n_sla, double tol) {
  auto [sp, model] = preset(model_id);
  sp.lambda = lambda;
  sp.validate();
  CostModel cm = to_cost_model(model, lambda);
  cm.holding_offset = n_sla;  // exact, independent of t_sla * lambda rounding

  const UniformizedMdp mdp = build_mdp(sp, cm);
  const MdpSolution sol = policy_iteration(mdp, PiVariant::Hysteresis, tol);
  const std::vector<double> pi = policy_stationary(mdp, sol.policy);

  ConcretePoint pt;
  pt.model = model_id;
  pt.lambda = lambda;
  pt.n_sla = n_sla;
  double total = 0.0;
  for (int i = 0; i < mdp.num_states(); ++i) {
    if (pi[i] == 0.0) continue;
    const State s = mdp.state(i);
    const int a = sol.policy.at_index(i);
    total += pi[i] * mdp.cost(i, a) * mdp.unif_rate;
    double perf = cm.holding(s.m);
    if (s.m == sp.big_b) perf += lambda * cm.c_r;
    pt.performance_cost += pi[i] * perf;
  }
  pt.cost = total;
  pt.energy_cost = total - pt.performance_cost;

  pt.first_activation = sp.inf();
  if (sp.big_k >= 2) {
    for (int m = 0; m <= sp.big_b; ++m)
      if (sol.policy.at(m, 1) == 1) {
        pt.first_activation = m;
        break;
      }
  }
  return pt;
}

std::vector<ConcretePoint> run_concrete(const std::string& model_id, bool sweep_n_sla,
                                        const std::vector<double>& values, double fixed, double tol) {
  std::vector<ConcretePoint> pts;
  for (double v : values)
    pts.push_back(sweep_n_sla ? solve_concrete(model_id, fixed, v, tol) : solve_concrete(model_id, v, fixed, tol));
  return pts;
}

void write_concrete_csv(const std::vector<ConcretePoint>& pts, std::ostream& os) {
  os << "model,lambda,n_sla,cost,first_activation,performance_cost,energy_cost\n";
  os << std::setprecision(12);
  for (const auto& p : pts)
    os << p.model << ',' << p.lambda << ',' << p.n_sla << ',' << p.cost << ',' << p.first_activation << ','
       << p.performance_cost << ',' << p.energy_cost << '\n';
}

}  // namespace hyst
