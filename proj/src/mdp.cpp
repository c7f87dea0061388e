#include "hysteresis/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace hyst {

std::string to_string(PiVariant v) {
  switch (v) {
    case PiVariant::Plain: return "PI";
    case PiVariant::Adapted: return "PI-Adapted";
    case PiVariant::DoubleLevel: return "DL-PI";
    case PiVariant::Hysteresis: return "Hy-PI";
  }
  return "?";
}

std::string to_string(ArrivalRegime r) {
  switch (r) {
    case ArrivalRegime::Medium: return "Medium";
    case ArrivalRegime::Low: return "Low";
    case ArrivalRegime::High: return "High";
  }
  return "?";
}

UniformizedMdp build_mdp(const SystemParams& sp, const CostModel& cm) {
  sp.validate();
  UniformizedMdp mdp;
  mdp.sp = sp;
  mdp.cm = cm;
  mdp.unif_rate = sp.unif_rate();
  const int n = sp.num_states();
  mdp.kernel.resize(static_cast<size_t>(n) * 3);
  mdp.stage_cost.resize(static_cast<size_t>(n) * 3);
  const double u = mdp.unif_rate;
  for (int i = 0; i < n; ++i) {
    const auto [m, k] = mdp.state(i);
    for (int a = -1; a <= 1; ++a) {
      const int nk = std::clamp(k + a, 1, sp.big_k);
      auto& row = mdp.kernel[static_cast<size_t>(i) * 3 + a + 1];
      auto add = [&row](int to, double p) {
        for (int j = 0; j < row.n; ++j)
          if (row.to[j] == to) { row.p[j] += p; return; }
        row.to[row.n] = to;
        row.p[row.n] = p;
        ++row.n;
      };
      // An arrival at m = B is rejected but the action still takes effect.
      const double p_up = sp.lambda / u;
      const double dep = m > 0 ? sp.mu * std::min(m, nk) : 0.0;
      add(mdp.index(std::min(m + 1, sp.big_b), nk), p_up);
      if (m > 0) add(mdp.index(m - 1, nk), dep / u);
      const double rest = 1.0 - p_up - dep / u;
      if (rest > 0.0) add(i, rest);

      const double big_lambda = sp.lambda + sp.mu * std::min(m, nk);
      double c = 0.0;
      if (a == 1) c += cm.c_a * big_lambda / u;
      if (a == -1) c += cm.c_d * big_lambda / u;
      if (m == sp.big_b) c += sp.lambda / u * cm.c_r;
      c += (nk * cm.c_s + cm.holding(m) + cm.c_static) / u;
      mdp.stage_cost[static_cast<size_t>(i) * 3 + a + 1] = c;
    }
  }
  return mdp;
}

namespace {

constexpr int kPreference[3] = {0, -1, 1};

uint64_t policy_hash(const MdpPolicy& p) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (int i = 0; i < p.size(); ++i) {
    h ^= static_cast<uint64_t>(p.at_index(i) + 1);
    h *= 1099511628211ULL;
  }
  return h;
}

inline double q_value(const UniformizedMdp& mdp, int i, int a, const std::vector<double>& v) {
  const auto& row = mdp.row(i, a);
  double q = mdp.cost(i, a);
  for (int j = 0; j < row.n; ++j) q += row.p[j] * v[row.to[j]];
  return q;
}

// Bellman operator with the greedy choice; returns (T v)(i) and the action.
inline std::pair<double, int> bellman(const UniformizedMdp& mdp, int i, const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  int best_a = 0;
  for (int a : kPreference) {
    if (!mdp.admissible(i, a)) continue;
    const double q = q_value(mdp, i, a, v);
    if (q < best) {
      best = q;
      best_a = a;
    }
  }
  return {best, best_a};
}

MdpSolution value_iteration_impl(const UniformizedMdp& mdp, double eps, long max_iter, int reference) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const int n = mdp.num_states();
  std::vector<double> v(n, 0.0), tv(n);
  MdpSolution sol;
  double span = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 0.0;
  for (long it = 1; it <= max_iter; ++it) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (int i = 0; i < n; ++i) {
      tv[i] = bellman(mdp, i, v).first;
      const double d = tv[i] - v[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    if (reference >= 0) {
      const double ref = tv[reference];
      for (double& x : tv) x -= ref;
    }
    v.swap(tv);
    if (span < eps) {
      sol.stats.iterations = it;
      sol.stats.converged = true;
      break;
    }
  }
  sol.stats.residual = span;
  if (!sol.stats.converged) {
    std::ostringstream os;
    os << "value iteration did not converge in " << max_iter << " sweeps (span " << span << ")";
    throw IterationLimitError(os.str(), max_iter, span);
  }
  if (reference < 0) {
    const double base = v[0];
    for (double& x : v) x -= base;
  }
  sol.policy = greedy_policy(mdp, v);
  sol.value.values = std::move(v);
  sol.value.stage_gain = 0.5 * (lo + hi);
  sol.value.gain = sol.value.stage_gain * mdp.unif_rate;
  return sol;
}

double span_of(const std::vector<double>& a, const std::vector<double>& b) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

}  // namespace

MdpPolicy greedy_policy(const UniformizedMdp& mdp, const std::vector<double>& values) {
  MdpPolicy p(mdp.sp.big_k, mdp.sp.big_b);
  for (int i = 0; i < mdp.num_states(); ++i) p.set_index(i, bellman(mdp, i, values).second);
  return p;
}

MdpSolution value_iteration(const UniformizedMdp& mdp, double eps, long max_iter) {
  return value_iteration_impl(mdp, eps, max_iter, -1);
}

MdpSolution relative_value_iteration(const UniformizedMdp& mdp, double eps, long max_iter, State reference) {
  if (reference.m < 0 || reference.m > mdp.sp.big_b || reference.k < 1 || reference.k > mdp.sp.big_k)
    throw std::invalid_argument("reference state out of range");
  return value_iteration_impl(mdp, eps, max_iter, mdp.index(reference.m, reference.k));
}

MdpSolution policy_iteration(const UniformizedMdp& mdp, PiVariant variant, double eps, long max_iter,
                             const MdpPolicy* initial) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const auto& sp = mdp.sp;
  const int n = mdp.num_states();
  MdpPolicy d = initial ? *initial : communicating_policy(sp);
  if (d.big_k() != sp.big_k || d.big_b() != sp.big_b) throw std::invalid_argument("initial policy size mismatch");

  std::vector<double> h(n, 0.0), th(n);
  long sweeps = variant == PiVariant::Adapted ? 10 : 100;
  constexpr long kMaxSweeps = 10000;
  double prev_gain = std::numeric_limits<double>::quiet_NaN();
  double prev_span = std::numeric_limits<double>::infinity();
  constexpr long max_fallback_sweeps = 10000000;
  MdpSolution sol;
  double span = std::numeric_limits<double>::infinity();
  double g_est = 0.0;

  // Improvement, scanned level by level in increasing m. The structured
  // variants restrict the candidate actions to keep the policy monotone.
  auto improve = [&](bool restricted, long& evaluations) {
    MdpPolicy next(sp.big_k, sp.big_b);
    for (int k = 1; k <= sp.big_k; ++k) {
      for (int m = 0; m <= sp.big_b; ++m) {
        const int i = mdp.index(m, k);
        int amin = k > 1 ? -1 : 0;
        int amax = k < sp.big_k ? 1 : 0;
        int lo = amin, hi = amax;
        if (restricted) {
          // Target level monotone in m and in k (double-level class).
          if (m > 0) lo = std::max(lo, next.at(m - 1, k));
          if (k > 1) lo = std::max(lo, next.at(m, k - 1) - 1);
        }
        if (restricted && variant == PiVariant::Hysteresis && k > 1) {
          // Decision rule decreasing in k (hysteresis class).
          hi = std::min(hi, next.at(m, k - 1));
        }
        lo = std::clamp(lo, amin, amax);
        hi = std::clamp(hi, lo, amax);

        double best = std::numeric_limits<double>::infinity();
        int best_a = lo;
        double q_current = std::numeric_limits<double>::infinity();
        for (int a : kPreference) {
          if (a < lo || a > hi) continue;
          const double q = q_value(mdp, i, a, h);
          ++evaluations;
          if (a == d.at_index(i)) q_current = q;
          if (q < best) {
            best = q;
            best_a = a;
          }
        }
        // Keep the incumbent action on numerical ties to avoid cycling.
        if (q_current <= best + 1e-13 * (1.0 + std::abs(best))) {
          best_a = d.at_index(i);
          best = q_current;
        }
        next.set_index(i, best_a);
        th[i] = best;
      }
    }
    return next;
  };

  bool structured = variant == PiVariant::DoubleLevel || variant == PiVariant::Hysteresis;
  std::unordered_map<uint64_t, int> seen{{policy_hash(d), 1}};
  for (long it = 1; it <= max_iter; ++it) {
    // Partial evaluation of d by relative value sweeps.
    double eval_residual = 0.0;
    for (long s = 0; s < sweeps; ++s) {
      for (int i = 0; i < n; ++i) th[i] = q_value(mdp, i, d.at_index(i), h);
      eval_residual = span_of(th, h);
      const double ref = th[0];
      for (int i = 0; i < n; ++i) h[i] = th[i] - ref;
    }
    sol.stats.evaluation_sweeps += sweeps;

    MdpPolicy next = improve(structured, sol.stats.action_evaluations);
    ++sol.stats.improvement_steps;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < n; ++i) {
      const double diff = th[i] - h[i];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    span = hi - lo;
    g_est = 0.5 * (lo + hi);
    sol.stats.iterations = it;
    const bool stable = next == d;
    if (variant == PiVariant::Adapted && !std::isnan(prev_gain) && eval_residual > std::abs(g_est - prev_gain))
      sweeps = std::min(sweeps * 2, kMaxSweeps);
    prev_gain = g_est;
    // A stable restricted policy whose span stops shrinking is multichain
    // (its classes have different gains), so it cannot meet the span test.
    const bool stagnant = std::abs(span - prev_span) <= 1e-6 * span;
    prev_span = span;
    if (structured && !stable && ++seen[policy_hash(next)] >= 3) {
      // The restricted step can cycle between policies (an early revisit is
      // normal under partial evaluation); leave the restriction.
      structured = false;
      next = improve(false, sol.stats.action_evaluations);
      ++sol.stats.improvement_steps;
      d = std::move(next);
      continue;
    }
    if (stable && structured && (span < eps || stagnant)) {
      // The structured optimum is confirmed by one unrestricted improvement
      // step; if it finds a better action, the search continues unrestricted.
      structured = false;
      next = improve(false, sol.stats.confirmation_evaluations);
      if (next == d && span < eps) {
        sol.stats.converged = true;
        break;
      }
      d = std::move(next);
      continue;
    }
    d = std::move(next);
    if (stable && span < eps) {
      sol.stats.converged = true;
      break;
    }
    if (stable && stagnant) {
      // Stalled on a multichain policy: relative value iteration from the
      // current values (convergent on this communicating model), then resume.
      double vi_span = std::numeric_limits<double>::infinity();
      while (vi_span >= eps && sol.stats.fallback_sweeps < max_fallback_sweeps) {
        double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
        for (int i = 0; i < n; ++i) {
          th[i] = bellman(mdp, i, h).first;
          vlo = std::min(vlo, th[i] - h[i]);
          vhi = std::max(vhi, th[i] - h[i]);
        }
        vi_span = vhi - vlo;
        const double ref = th[0];
        for (int i = 0; i < n; ++i) h[i] = th[i] - ref;
        ++sol.stats.fallback_sweeps;
      }
      d = greedy_policy(mdp, h);
      prev_span = std::numeric_limits<double>::infinity();
    }
  }
  sol.stats.residual = span;
  if (!sol.stats.converged) {
    std::ostringstream os;
    os << to_string(variant) << " did not converge in " << max_iter << " iterations (span " << span << ")";
    throw IterationLimitError(os.str(), max_iter, span);
  }
  sol.policy = std::move(d);
  sol.value.values = std::move(h);
  sol.value.stage_gain = g_est;
  sol.value.gain = g_est * mdp.unif_rate;
  return sol;
}

SparseRowMatrix induced_generator(const UniformizedMdp& mdp, const MdpPolicy& policy, std::vector<int>* reachable) {
  const int n = mdp.num_states();
  std::vector<int> local(n, -1), order;
  order.push_back(0);
  local[0] = 0;
  for (size_t head = 0; head < order.size(); ++head) {
    const int i = order[head];
    const auto& row = mdp.row(i, policy.at_index(i));
    for (int j = 0; j < row.n; ++j) {
      if (row.p[j] > 0.0 && local[row.to[j]] < 0) {
        local[row.to[j]] = static_cast<int>(order.size());
        order.push_back(row.to[j]);
      }
    }
  }
  const int r = static_cast<int>(order.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int li = 0; li < r; ++li) {
    const int i = order[li];
    const auto& row = mdp.row(i, policy.at_index(i));
    for (int j = 0; j < row.n; ++j)
      if (row.to[j] != i && row.p[j] > 0.0) {
        trips.emplace_back(li, local[row.to[j]], row.p[j]);
        trips.emplace_back(li, li, -row.p[j]);
      }
  }
  SparseRowMatrix g(r, r);
  g.setFromTriplets(trips.begin(), trips.end());
  g.makeCompressed();
  if (reachable) *reachable = std::move(order);
  return g;
}

std::vector<double> policy_stationary(const UniformizedMdp& mdp, const MdpPolicy& policy) {
  std::vector<int> reach;
  auto g = induced_generator(mdp, policy, &reach);
  auto pi_local = lu_stationary(g);
  std::vector<double> pi(mdp.num_states(), 0.0);
  for (size_t li = 0; li < reach.size(); ++li) pi[reach[li]] = pi_local[li];
  return pi;
}

double policy_gain(const UniformizedMdp& mdp, const MdpPolicy& policy) {
  const auto pi = policy_stationary(mdp, policy);
  double g = 0.0;
  for (int i = 0; i < mdp.num_states(); ++i)
    if (pi[i] > 0.0) g += pi[i] * mdp.cost(i, policy.at_index(i));
  return g * mdp.unif_rate;
}

std::vector<std::vector<State>> recurrent_classes(const UniformizedMdp& mdp, const MdpPolicy& policy) {
  // Iterative Tarjan SCC; closed components are the recurrent classes.
  const int n = mdp.num_states();
  auto succ = [&](int i) -> const UniformizedMdp::Row& { return mdp.row(i, policy.at_index(i)); };
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0, ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<int, int>> work{{root, 0}};
    while (!work.empty()) {
      auto& [v, edge] = work.back();
      if (edge == 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
      }
      const auto& row = succ(v);
      bool descended = false;
      while (edge < row.n) {
        const int w = row.to[edge++];
        if (row.p[edge - 1] <= 0.0) continue;
        if (index[w] < 0) {
          work.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const int finished = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[finished]);
    }
  }
  std::vector<char> closed(ncomp, 1);
  for (int i = 0; i < n; ++i) {
    const auto& row = succ(i);
    for (int j = 0; j < row.n; ++j)
      if (row.p[j] > 0.0 && comp[row.to[j]] != comp[i]) closed[comp[i]] = 0;
  }
  std::vector<int> slot(ncomp, -1);
  std::vector<std::vector<State>> out;
  for (int i = 0; i < n; ++i) {
    const int c = comp[i];
    if (!closed[c]) continue;
    if (slot[c] < 0) {
      slot[c] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[c]].push_back(mdp.state(i));
  }
  return out;
}

std::optional<HysteresisThresholds> extract_hysteresis(const MdpPolicy& p, const SystemParams& sp) {
  const int kk = sp.big_k, b = sp.big_b;
  if (p.big_k() != kk || p.big_b() != b) throw std::invalid_argument("policy does not match system size");
  HysteresisThresholds ht;
  ht.l.assign(kk - 1, 0);
  ht.big_l.assign(kk - 1, sp.inf());
  for (int k = 1; k <= kk; ++k) {
    int deact = 0;
    int first_act = sp.inf();
    for (int m = 0; m <= b; ++m) {
      const int a = p.at(m, k);
      if (m > 0 && a < p.at(m - 1, k)) return std::nullopt;
      if (a == -1) deact = m + 1;
      if (a == 1 && first_act > b) first_act = m;
    }
    if (k > 1) ht.l[k - 2] = deact;
    if (k < kk) ht.big_l[k - 1] = first_act;
  }
  // l_k <= L_k (level k-1 activation); l_k <= L_{k+1} holds per level.
  for (int k = 2; k <= kk; ++k)
    if (ht.l[k - 2] > ht.big_l[k - 2]) return std::nullopt;
  return ht;
}

std::optional<ThresholdPolicy> shift_to_mc(const HysteresisThresholds& ht, const SystemParams& sp) {
  ThresholdPolicy tp;
  for (size_t i = 0; i < ht.big_l.size(); ++i) {
    if (ht.big_l[i] > sp.big_b || ht.l[i] == 0) return std::nullopt;
    tp.f.push_back(ht.big_l[i] - 1);
    tp.r.push_back(ht.l[i] - 1);
  }
  if (tp.f.size() != static_cast<size_t>(sp.big_k - 1) || !validate_threshold_policy(tp, sp)) return std::nullopt;
  return tp;
}

MdpPolicy communicating_policy(const SystemParams& sp) {
  MdpPolicy p(sp.big_k, sp.big_b);
  for (int k = 2; k <= sp.big_k; ++k) p.set(0, k, -1);
  for (int k = 1; k < sp.big_k; ++k) p.set(sp.big_b, k, 1);
  return p;
}

MultichainWitness check_multichain_witness(const SystemParams& sp, const CostModel& cm, int pivot) {
  if (sp.big_k < 2) throw std::invalid_argument("multichain witness requires K >= 2");
  if (pivot == 0) pivot = 2;
  if (pivot < 1 || pivot > sp.big_k) throw std::invalid_argument("pivot level out of range");
  MultichainWitness w{MdpPolicy(sp.big_k, sp.big_b), pivot, {}};
  for (int k = 1; k <= sp.big_k; ++k) {
    for (int m = 0; m <= sp.big_b; ++m) {
      if (k < pivot - 1 && m >= 1) w.policy.set(m, k, 1);
      if (k > pivot + 1 && m < sp.big_b) w.policy.set(m, k, -1);
    }
  }
  w.classes = recurrent_classes(build_mdp(sp, cm), w.policy);
  if (w.classes.size() < 2) throw std::logic_error("witness policy is not multichain");
  return w;
}

ArrivalRegime classify_arrival_regime(const SystemParams& sp, const HysteresisThresholds& optimal) {
  for (int v : optimal.big_l)
    if (v > sp.big_b) return ArrivalRegime::Low;
  for (int v : optimal.l)
    if (v == 0) return ArrivalRegime::High;
  return ArrivalRegime::Medium;
}

}  // namespace hyst
