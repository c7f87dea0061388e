#include "hysteresis/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyst {

void to_json(json& j, const SystemParams& sp) {
  j = json{{"lambda", sp.lambda}, {"mu", sp.mu}, {"big_k", sp.big_k}, {"big_b", sp.big_b}};
}

void from_json(const json& j, SystemParams& sp) {
  j.at("lambda").get_to(sp.lambda);
  j.at("mu").get_to(sp.mu);
  j.at("big_k").get_to(sp.big_k);
  j.at("big_b").get_to(sp.big_b);
}

void to_json(json& j, const CostRates& cr) {
  j = json{{"c_h", cr.c_h}, {"c_s", cr.c_s}, {"c_a", cr.c_a}, {"c_d", cr.c_d}, {"c_r", cr.c_r}};
}

void from_json(const json& j, CostRates& cr) {
  j.at("c_h").get_to(cr.c_h);
  j.at("c_s").get_to(cr.c_s);
  j.at("c_a").get_to(cr.c_a);
  j.at("c_d").get_to(cr.c_d);
  j.at("c_r").get_to(cr.c_r);
}

void to_json(json& j, const ThresholdPolicy& tp) { j = json{{"f", tp.f}, {"r", tp.r}}; }

void from_json(const json& j, ThresholdPolicy& tp) {
  j.at("f").get_to(tp.f);
  j.at("r").get_to(tp.r);
}

void to_json(json& j, const SlaCostModel& m) {
  j = json{{"c_p", m.c_p}, {"c_s", m.c_s}, {"c_a", m.c_a}, {"c_d", m.c_d}, {"c_static", m.c_static}, {"t_sla", m.t_sla}};
}

void from_json(const json& j, SlaCostModel& m) {
  j.at("c_p").get_to(m.c_p);
  j.at("c_s").get_to(m.c_s);
  j.at("c_a").get_to(m.c_a);
  j.at("c_d").get_to(m.c_d);
  j.at("c_static").get_to(m.c_static);
  j.at("t_sla").get_to(m.t_sla);
}

namespace {

json threshold_array(const std::vector<int>& v, int big_b) {
  json a = json::array();
  for (int x : v) {
    if (x > big_b) a.push_back("inf");
    else a.push_back(x);
  }
  return a;
}

std::vector<int> parse_threshold_array(const json& a, int inf) {
  std::vector<int> v;
  for (const auto& x : a) {
    if (x.is_string()) {
      if (x.get<std::string>() != "inf") throw std::invalid_argument("threshold must be an integer or \"inf\"");
      v.push_back(inf);
    } else {
      v.push_back(x.get<int>());
    }
  }
  return v;
}

}  // namespace

json thresholds_to_json(const HysteresisThresholds& ht, const SystemParams& sp) {
  return json{{"l", threshold_array(ht.l, sp.big_b)}, {"big_l", threshold_array(ht.big_l, sp.big_b)}};
}

HysteresisThresholds thresholds_from_json(const json& j, const SystemParams& sp) {
  HysteresisThresholds ht;
  ht.l = parse_threshold_array(j.at("l"), sp.inf());
  ht.big_l = parse_threshold_array(j.at("big_l"), sp.inf());
  return ht;
}

json report_to_json(const SolveReport& rep) {
  json j;
  j["algorithm"] = rep.algorithm;
  j["params"] = rep.sp;
  j["costs"] = json{{"c_h", rep.costs.c_h}, {"holding_offset", rep.costs.holding_offset}, {"c_s", rep.costs.c_s},
                    {"c_a", rep.costs.c_a},  {"c_d", rep.costs.c_d},  {"c_r", rep.costs.c_r},
                    {"c_static", rep.costs.c_static}};
  if (rep.threshold_policy) j["policy"] = *rep.threshold_policy;
  if (rep.thresholds) j["thresholds"] = thresholds_to_json(*rep.thresholds, rep.sp);
  j["cost"] = rep.cost;
  j["iterations"] = rep.iterations;
  j["evaluations"] = rep.evaluations;
  j["wall_seconds"] = rep.wall_seconds;
  j["converged"] = rep.converged;
  return j;
}

void write_policy(const MdpPolicy& p, std::ostream& os) {
  for (int k = 1; k <= p.big_k(); ++k)
    for (int m = 0; m <= p.big_b(); ++m) os << m << ' ' << k << ' ' << p.at(m, k) << '\n';
}

MdpPolicy read_policy(std::istream& is, const SystemParams& sp) {
  MdpPolicy p(sp.big_k, sp.big_b);
  std::vector<char> seen(p.size(), 0);
  int m, k, a;
  while (is >> m >> k >> a) {
    if (m < 0 || m > sp.big_b || k < 1 || k > sp.big_k) throw std::invalid_argument("policy row out of range");
    p.set(m, k, a);
    seen[p.index(m, k)] = 1;
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("policy dump does not cover every state");
  return p;
}

json load_json_arg(const std::string& arg) {
  auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw std::invalid_argument("cannot open " + arg);
  return json::parse(in);
}

std::string format_thresholds(const std::vector<int>& v, int big_b) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    if (v[i] > big_b) os << "inf";
    else os << v[i];
  }
  return os.str();
}

}  // namespace hyst
