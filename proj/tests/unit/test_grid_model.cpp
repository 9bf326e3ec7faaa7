#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include <json.hpp>

#include "gridplan/errors.hpp"
#include "gridplan/formulation.hpp"
#include "gridplan/grid_model.hpp"
#include "gridplan/reporting.hpp"
#include "gridplan/simplex.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace gridplan;
using nlohmann::json;

namespace {

json two_bus_doc() {
  return json::parse(R"({
    "base_mva": 100,
    "buses": [{"id": 0, "is_reference": true, "coordinates": [38.5, -121.5]}, {"id": 1}],
    "lines": [{"id": 0, "from_bus": 0, "to_bus": 1, "susceptance_b": 10, "flow_limit": 2,
               "angle_min": -0.5, "angle_max": 0.5, "length_miles": 12, "risk_series": [0.3, 0.8]}],
    "generators": [{"id": 0, "bus": 0, "p_min": 0, "p_max_series": [3], "cost_coeff": 20}],
    "loads": [{"id": 0, "bus": 1, "demand_series": [1]}]
  })");
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal two-bus file loads") {
  const Network net = parse_network(two_bus_doc());
  CHECK(net.n_buses() == 2);
  CHECK(net.n_lines() == 1);
  CHECK(net.n_generators() == 1);
  CHECK(net.buses()[0].is_reference);
  // candidates default to every bus
  REQUIRE(net.battery_candidates().size() == 2);
  CHECK(net.candidate_index(1) == 1);
  CHECK(net.battery_candidates()[0].tie_power_to_energy);
}

TEST_CASE("tutorial data file loads") {
  const Network net = load_network(std::string(GRIDPLAN_DATA_DIR) + "/tutorial_2bus.json");
  CHECK(net.n_buses() == 2);
  CHECK(net.battery_candidates().empty());
  CHECK(net.lines()[0].length_miles == doctest::Approx(50.0));
}

TEST_CASE("empty candidate list means no candidates") {
  auto doc = two_bus_doc();
  doc["battery_candidates"] = json::array();
  CHECK(parse_network(doc).battery_candidates().empty());
  doc["battery_candidates"] = json::array({json{{"bus", 1}, {"e_max", 2.0}}});
  const auto net = parse_network(doc);
  REQUIRE(net.battery_candidates().size() == 1);
  CHECK(net.candidate_index(0) == -1);
  CHECK(net.battery_candidates()[0].e_max == doctest::Approx(2.0));
}

TEST_CASE("duplicate bus id is rejected by name") {
  auto doc = two_bus_doc();
  doc["buses"][1]["id"] = 0;
  const auto msg = message_of([&] { parse_network(doc); });
  CHECK(msg.find("duplicate bus id 0") != std::string::npos);
  CHECK_THROWS_AS(parse_network(doc), ValidationError);
}

TEST_CASE("zero susceptance is rejected") {
  auto doc = two_bus_doc();
  doc["lines"][0]["susceptance_b"] = 0.0;
  CHECK_THROWS_AS(parse_network(doc), ValidationError);
}

TEST_CASE("other structural violations") {
  SUBCASE("unknown field") {
    auto doc = two_bus_doc();
    doc["lines"][0]["colour"] = "red";
    CHECK_THROWS_AS(parse_network(doc), ParseError);
  }
  SUBCASE("self loop") {
    auto doc = two_bus_doc();
    doc["lines"][0]["to_bus"] = 0;
    CHECK_THROWS_AS(parse_network(doc), ValidationError);
  }
  SUBCASE("angle window must contain zero") {
    auto doc = two_bus_doc();
    doc["lines"][0]["angle_min"] = 0.1;
    CHECK_THROWS_AS(parse_network(doc), ValidationError);
  }
  SUBCASE("no reference bus") {
    auto doc = two_bus_doc();
    doc["buses"][0]["is_reference"] = false;
    CHECK_THROWS_AS(parse_network(doc), ValidationError);
  }
  SUBCASE("two references in one island") {
    auto doc = two_bus_doc();
    doc["buses"][1]["is_reference"] = true;
    CHECK_THROWS_AS(parse_network(doc), ValidationError);
  }
  SUBCASE("operation cost above generator cost") {
    auto doc = two_bus_doc();
    doc["costs"] = {{"lambda_op", 25.0}};
    CHECK_THROWS_AS(parse_network(doc), ValidationError);
  }
  SUBCASE("malformed JSON text") {
    const auto path = std::filesystem::temp_directory_path() / "gridplan_bad.json";
    std::ofstream(path) << "{ \"base_mva\": 100, ";
    CHECK_THROWS_AS(load_network(path), ParseError);
    std::filesystem::remove(path);
  }
  SUBCASE("missing file names the path") {
    const auto msg = message_of([] { load_network("/nonexistent/grid.json"); });
    CHECK(msg.find("/nonexistent/grid.json") != std::string::npos);
  }
}

TEST_CASE("complete recourse check") {
  auto doc = two_bus_doc();
  CHECK_NOTHROW(validate_complete_recourse(parse_network(doc)));

  doc["generators"][0]["p_min"] = 0.5;
  const auto msg = message_of([&] { parse_network(doc); });
  CHECK(msg.find("offending generators: 0") != std::string::npos);

  NetworkData d = parse_network(two_bus_doc()).data();
  d.generators.clear();
  CHECK_NOTHROW(validate_complete_recourse(Network(d)));
}

TEST_CASE("recourse check agrees with subproblem feasibility") {
  std::mt19937_64 rng(7);
  // accepted networks: the operational LP is feasible for any investment
  for (const auto& spec : testing::oracle_suite()) {
    if (spec.n_buses > 6) continue;
    const auto inst = testing::random_instance(spec);
    CHECK_NOTHROW(validate_complete_recourse(inst.net));
    for (int k = 0; k < 20; ++k) {
      const auto x = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
      const auto& s = inst.scenarios[static_cast<std::size_t>(k) % inst.scenarios.size()];
      const auto sub = build_subproblem(inst.net, s, inst.risky, x);
      CHECK(lp::solve_lp(sub.lp).status == lp::LpStatus::Optimal);
    }
  }
  // rejected network: a must-run unit stranded on a bus with no load
  NetworkData d;
  d.buses = {Bus{0, "a", std::nullopt, true}, Bus{1, "b", std::nullopt, false}};
  Line ln;
  ln.id = 0;
  ln.from_bus = 0;
  ln.to_bus = 1;
  ln.susceptance_b = 10;
  ln.flow_limit = 2;
  ln.angle_min = -0.5;
  ln.angle_max = 0.5;
  d.lines = {ln};
  d.generators = {Generator{0, 1, 0.5, {1.0}, 20.0}};
  d.loads = {Load{0, 0, {1.0}}};
  const Network net(d);
  CHECK_THROWS_AS(validate_complete_recourse(net), ValidationError);
  Scenario s = default_scenario(net, 0, 24);
  s.energized[0] = false;
  const auto risky = build_risky_set({s}, 1);
  int infeasible = 0;
  for (int k = 0; k < 20; ++k) {
    auto x = testing::random_feasible_decision(net, risky, Scheme::BatteryPlusUnderground, rng);
    if (k == 0) x.underground[0] = 0.0;
    const auto sub = build_subproblem(net, s, risky, x);
    if (lp::solve_lp(sub.lp).status != lp::LpStatus::Optimal) ++infeasible;
  }
  CHECK(infeasible > 0);
}

TEST_CASE("amortized investment cost") {
  CostParameters c;
  CapitalCost battery{3800e6, 0.0};
  CHECK(amortized_investment_cost(c, battery, 1) == doctest::Approx(3800e6 / 3650.0).epsilon(1e-12));
  CHECK(format_musd(amortized_investment_cost(c, battery, 1) / 1e6) == "1.04");
  CapitalCost ug{0.0, 2687e6};
  CHECK(amortized_investment_cost(c, ug, 1) / 1e6 == doctest::Approx(0.184).epsilon(1e-3));
  CHECK(format_musd(amortized_investment_cost(c, ug, 1) / 1e6) == "0.18");
  CHECK(amortized_investment_cost(c, CapitalCost{}, 5) == 0.0);
  // scales with the number of scenario days
  CHECK(amortized_investment_cost(c, battery, 3) == doctest::Approx(3.0 * 3800e6 / 3650.0));

  const Network net = parse_network(two_bus_doc());
  CHECK(amortized_investment_cost(net, {0}, InvestmentDecision::zero(2, 1), 1) == 0.0);
  auto x = InvestmentDecision::zero(2, 1);
  x.batt_energy[1] = 2.0;
  x.batt_power[1] = 2.0;
  x.batt_placed[1] = 1.0;
  x.underground[0] = 1.0;
  const auto cap = capital_cost(net, {0}, x);
  const auto& k = net.costs();
  CHECK(cap.battery == doctest::Approx(k.c_energy * 200 + k.c_power * 200 + k.c_fixed));
  CHECK(cap.underground == doctest::Approx(k.c_underground * 12));
}

TEST_CASE("serialization round trip") {
  for (const char* file : {"/tutorial_2bus.json", "/example_5bus.json"}) {
    const Network net = load_network(std::string(GRIDPLAN_DATA_DIR) + file);
    const Network again = parse_network(network_to_json(net));
    CHECK(again == net);
  }
  const auto inst = testing::random_instance({6, 2, 2, 2, 24, 9, true});
  CHECK(parse_network(network_to_json(inst.net)) == inst.net);
}

TEST_CASE("per-unit conversion") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3), base(1.0, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng), b = base(rng);
    CHECK(std::abs(from_system_pu(to_system_pu(v, b), b) - v) <= 1e-12 * (1.0 + std::abs(v)));
  }
  // a file on a 50 MVA base is rescaled to the 100 MVA system base
  auto doc = two_bus_doc();
  doc["base_mva"] = 50;
  const Network net = parse_network(doc);
  CHECK(net.loads()[0].demand_at(3) == doctest::Approx(0.5));
  CHECK(net.lines()[0].flow_limit == doctest::Approx(1.0));
  CHECK(net.generators()[0].p_max_at(0) == doctest::Approx(1.5));
}
