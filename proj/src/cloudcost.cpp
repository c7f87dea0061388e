#include "hysteresis/cloudcost.hpp"

#include <cmath>
#include <stdexcept>

#include "hysteresis/ctmc.hpp"

namespace hyst {

void SlaCostModel::validate() const {
  for (double v : {c_p, c_s, c_a, c_d, c_static, t_sla})
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("SLA cost fields must be finite and >= 0");
}

CostModel to_cost_model(const SlaCostModel& model, double lambda) {
  model.validate();
  CostModel cm;
  cm.c_h = model.c_p;
  cm.holding_offset = model.n_sla(lambda);
  cm.c_s = model.c_s;
  cm.c_a = model.c_a;
  cm.c_d = model.c_d;
  cm.c_r = model.c_p;
  cm.c_static = model.c_static;
  return cm;
}

double sla_state_cost(int m, int k, const SlaCostModel& model, const SystemParams& sp, const ThresholdPolicy& tp) {
  if (m < 0 || m > sp.big_b || k < 1 || k > sp.big_k) throw std::invalid_argument("state out of range");
  return mc_state_cost(tp, sp, to_cost_model(model, sp.lambda), m, k);
}

std::pair<SystemParams, SlaCostModel> preset(const std::string& model_id) {
  SystemParams sp;
  sp.lambda = 50.0;
  sp.big_b = 100;
  SlaCostModel m;
  m.c_static = 0.0158;
  if (model_id == "A") {
    sp.big_k = 3;
    sp.mu = 20.0;
    m.c_p = 0.0914;
    m.c_s = 0.00632;
    m.c_a = m.c_d = 0.00158;
  } else if (model_id == "B") {
    sp.big_k = 6;
    sp.mu = 10.0;
    m.c_p = 0.0211;
    m.c_s = 0.00316;
    m.c_a = m.c_d = 0.00079;
  } else if (model_id == "C") {
    sp.big_k = 12;
    sp.mu = 5.0;
    m.c_p = 0.0118;
    m.c_s = 0.00158;
    m.c_a = m.c_d = 0.00032;
  } else {
    throw std::invalid_argument("unknown preset '" + model_id + "' (expected A, B or C)");
  }
  return {sp, m};
}

}  // namespace hyst
