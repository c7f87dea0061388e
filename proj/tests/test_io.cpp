#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hysteresis/io.hpp"
#include "hysteresis/mdp.hpp"

using namespace hyst;

TEST_CASE("parameter and cost JSON round-trips") {
  SystemParams sp;
  sp.lambda = 2.5;
  sp.mu = 0.5;
  sp.big_k = 4;
  sp.big_b = 30;
  json j = sp;
  const auto back = j.get<SystemParams>();
  CHECK(back.lambda == 2.5);
  CHECK(back.mu == 0.5);
  CHECK(back.big_k == 4);
  CHECK(back.big_b == 30);

  CostRates cr{1, 2, 3, 4, 5};
  const auto cr2 = json(cr).get<CostRates>();
  CHECK(cr2.c_h == 1);
  CHECK(cr2.c_s == 2);
  CHECK(cr2.c_a == 3);
  CHECK(cr2.c_d == 4);
  CHECK(cr2.c_r == 5);

  ThresholdPolicy tp{{1, 3}, {0, 2}};
  CHECK(json(tp).get<ThresholdPolicy>() == tp);
  CHECK(json(tp).dump() == R"({"f":[1,3],"r":[0,2]})");

  CHECK_THROWS(json::parse(R"({"lambda":1})").get<SystemParams>());
}

TEST_CASE("thresholds use the inf sentinel in JSON") {
  SystemParams sp;
  sp.big_k = 3;
  sp.big_b = 10;
  HysteresisThresholds ht{{0, 4}, {5, 11}};
  const auto j = thresholds_to_json(ht, sp);
  CHECK(j["big_l"][1] == "inf");
  CHECK(j["l"][0] == 0);
  CHECK(thresholds_from_json(j, sp) == ht);
  CHECK_THROWS_AS(thresholds_from_json(json::parse(R"({"l":[0,1],"big_l":[2,"never"]})"), sp),
                  std::invalid_argument);
  CHECK(format_thresholds(ht.big_l, sp.big_b) == "5 inf");
}

TEST_CASE("policy dump round-trips") {
  SystemParams sp;
  sp.big_k = 3;
  sp.big_b = 6;
  sp.lambda = 2;
  sp.mu = 1;
  const auto p = policy_from_thresholds({{2, 3}, {4, 7}}, sp);
  std::stringstream ss;
  write_policy(p, ss);
  CHECK(read_policy(ss, sp) == p);

  std::istringstream partial("0 1 0\n1 1 1\n");
  CHECK_THROWS_AS(read_policy(partial, sp), std::invalid_argument);
  std::istringstream out_of_range("9 1 0\n");
  CHECK_THROWS_AS(read_policy(out_of_range, sp), std::invalid_argument);
}

TEST_CASE("solve reports serialise their fields") {
  SolveReport rep;
  rep.algorithm = "BPL";
  rep.sp.big_k = 2;
  rep.sp.big_b = 5;
  rep.threshold_policy = ThresholdPolicy{{2}, {1}};
  rep.thresholds = HysteresisThresholds{{2}, {3}};
  rep.cost = 1.25;
  rep.iterations = 3;
  rep.evaluations = 17;
  const auto j = report_to_json(rep);
  CHECK(j["algorithm"] == "BPL");
  CHECK(j["cost"] == 1.25);
  CHECK(j["evaluations"] == 17);
  CHECK(j["policy"]["f"][0] == 2);
  CHECK(j["thresholds"]["big_l"][0] == 3);
  CHECK(j["params"]["big_b"] == 5);
  CHECK_FALSE(j.contains("nonexistent"));
}

TEST_CASE("JSON arguments are inline text or files") {
  CHECK(load_json_arg(R"( {"a": 1})")["a"] == 1);
  const std::string path = "test_io_arg.json";
  {
    std::ofstream out(path);
    out << R"({"b": [1, 2]})";
  }
  CHECK(load_json_arg(path)["b"][1] == 2);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_json_arg("no_such_file.json"), std::invalid_argument);
}

TEST_CASE("SLA model JSON") {
  SlaCostModel m;
  m.c_p = 0.1;
  m.t_sla = 0.2;
  const auto back = json(m).get<SlaCostModel>();
  CHECK(back.c_p == 0.1);
  CHECK(back.t_sla == 0.2);
}
