#include "hysteresis/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "hysteresis/rng.hpp"

namespace hyst {

void SimConfig::validate() const {
  if (!(warmup >= 0.0)) throw std::invalid_argument("warmup must be >= 0");
  if (!(horizon > warmup)) throw std::invalid_argument("horizon must exceed warmup");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
}

namespace {

struct RepOutcome {
  std::vector<double> time_in;  // per state, within [warmup, horizon]
  long activations = 0, deactivations = 0, rejections = 0;
  long events = 0;
};

class Replication {
 public:
  Replication(const SimPolicy& policy, const SystemParams& sp, const SimConfig& cfg, int index)
      : policy_(policy), sp_(sp), cfg_(cfg), rng_(cfg.seed, static_cast<uint64_t>(index)),
        trace_(index == 0 ? cfg.trace : nullptr) {}

  RepOutcome run() {
    RepOutcome out;
    out.time_in.assign(sp_.num_states(), 0.0);
    const bool mdp = std::holds_alternative<MdpPolicy>(policy_);
    const ThresholdPolicy* tp = mdp ? nullptr : &std::get<ThresholdPolicy>(policy_);
    const MdpPolicy* q = mdp ? &std::get<MdpPolicy>(policy_) : nullptr;
    const int b = sp_.big_b, kk = sp_.big_k;
    const double t0 = cfg_.warmup, t1 = cfg_.horizon;

    int m = 0, k = 1;  // observed state
    double t = 0.0;
    bool counting = t0 <= 0.0;
    int level = k;     // physical level during the sojourn
    auto decide = [&]() {
      level = k;
      if (!mdp) return;
      const int a = q->at(m, k);
      level = std::clamp(k + a, 1, kk);
      if (counting) {
        if (a == 1) ++out.activations;
        if (a == -1) ++out.deactivations;
      }
      if (trace_ && a != 0) *trace_ << t << (a == 1 ? " activate " : " deactivate ") << m << ' ' << level << '\n';
    };
    decide();
    while (t < t1) {
      const double rate_a = sp_.lambda;
      const double rate_d = sp_.mu * std::min(m, level);
      const double total = rate_a + rate_d;
      const double dt = total > 0.0 ? rng_.exponential(total) : std::numeric_limits<double>::infinity();
      const double lo = std::max(t, t0), hi = std::min(t + dt, t1);
      if (hi > lo) out.time_in[(k - 1) * (b + 1) + m] += hi - lo;
      t += dt;
      if (t >= t1) break;
      counting = t >= t0;
      ++out.events;
      const bool arrival = rng_.uniform() * total < rate_a;
      if (mdp) {
        if (arrival) {
          if (m == b) {
            if (counting) ++out.rejections;
          } else {
            ++m;
          }
        } else {
          --m;
        }
        k = level;
      } else if (arrival) {
        if (k < kk && m == tp->f[k - 1]) {
          ++m;
          ++k;
          if (counting) ++out.activations;
        } else if (m == b) {
          if (counting) ++out.rejections;
        } else {
          ++m;
        }
      } else {
        if (k >= 2 && m == tp->r[k - 2] + 1) {
          --m;
          --k;
          if (counting) ++out.deactivations;
        } else {
          --m;
        }
      }
      if (trace_) *trace_ << t << (arrival ? " arrival " : " departure ") << m << ' ' << k << '\n';
      decide();
    }
    return out;
  }

 private:
  const SimPolicy& policy_;
  SystemParams sp_;
  SimConfig cfg_;
  Philox rng_;
  std::ostream* trace_;
};

}  // namespace

SimResult simulate(const SimPolicy& policy, const SystemParams& sp, const CostModel& cm, const SimConfig& cfg) {
  cfg.validate();
  if (!(sp.lambda >= 0.0) || !(sp.mu > 0.0) || sp.big_k < 1 || sp.big_b < sp.big_k)
    throw std::invalid_argument("invalid system parameters");
  if (const auto* tp = std::get_if<ThresholdPolicy>(&policy)) {
    SystemParams check = sp;
    if (check.lambda <= 0.0) check.lambda = 1.0;
    require_valid(*tp, check);
  } else {
    const auto& q = std::get<MdpPolicy>(policy);
    if (q.big_k() != sp.big_k || q.big_b() != sp.big_b) throw std::invalid_argument("policy does not match system size");
  }

  const int reps = cfg.replications;
  std::vector<RepOutcome> outcomes(reps);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < reps; r = next++) outcomes[r] = Replication(policy, sp, cfg, r).run();
  };
  const int threads = std::clamp(cfg.workers, 1, reps);
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const int b = sp.big_b;
  const double span = cfg.horizon - cfg.warmup;
  const auto* q = std::get_if<MdpPolicy>(&policy);
  SimResult res;
  res.occupancy.assign(sp.num_states(), 0.0);
  for (const auto& o : outcomes) {
    double cost = 0.0;
    for (int i = 0; i < sp.num_states(); ++i) {
      if (o.time_in[i] == 0.0) continue;
      const int m = i % (b + 1), k = i / (b + 1) + 1;
      const int level = q ? std::clamp(k + q->at(m, k), 1, sp.big_k) : k;
      cost += o.time_in[i] * (cm.holding(m) + cm.c_s * level + cm.c_static);
      res.occupancy[i] += o.time_in[i] / span / reps;
    }
    cost += cm.c_a * o.activations + cm.c_d * o.deactivations + cm.c_r * o.rejections;
    res.replication_costs.push_back(cost / span);
    res.events += o.events;
  }
  double sum = 0.0;
  for (double c : res.replication_costs) sum += c;
  res.mean_cost = sum / reps;
  if (reps > 1) {
    double ss = 0.0;
    for (double c : res.replication_costs) ss += (c - res.mean_cost) * (c - res.mean_cost);
    res.half_width = 1.96 * std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps));
  } else {
    res.half_width = std::numeric_limits<double>::infinity();
  }
  return res;
}

}  // namespace hyst
