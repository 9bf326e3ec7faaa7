#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gridplan/benders.hpp"
#include "gridplan/errors.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace gridplan;

namespace {

EngineConfig exact_config() {
  EngineConfig c;
  c.epsilon = 1e-7;
  c.max_iterations = 300;
  return c;
}

double monolithic_optimum(const testing::Instance& inst, Scheme scheme) {
  const auto built = build_monolithic(inst.net, inst.scenarios, inst.risky, scheme);
  const auto oracle = testing::enumerate_binaries(built.mip);
  REQUIRE(oracle);
  return oracle->objective;
}

double flat_dot(const InvestmentLayout& layout, const std::vector<double>& nu, const InvestmentDecision& a,
                const InvestmentDecision& b) {
  const auto fa = layout.flatten(a);
  const auto fb = layout.flatten(b);
  double s = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) s += nu[k] * (fa[k] - fb[k]);
  return s;
}

}  // namespace

TEST_CASE("bounds arithmetic") {
  const auto b0 = compute_bounds(3.5, {0.0, 0.0}, {0.0, 0.0});
  CHECK(b0.lower == 3.5);
  CHECK(b0.upper == 3.5);
  CHECK(relative_gap(b0) == 0.0);

  const auto b1 = compute_bounds(1.0, {2.0, 4.0}, {2.0, 4.0});
  CHECK(relative_gap(b1) == 0.0);

  const auto b2 = compute_bounds(1.0, {1.0, 0.0}, {3.0, 4.0});
  CHECK(b2.lower == 2.0);
  CHECK(b2.upper == 8.0);
  CHECK(relative_gap(b2) == (8.0 - 2.0) / 8.0);
  CHECK(relative_gap(Bounds{0.0, 0.0}) == 0.0);
}

TEST_CASE("engine configuration is validated") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.worker_count = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(std::string(to_string(Termination::GapLimit)) == "gap_limit");
  CHECK(std::string(to_string(Termination::IterationLimit)) == "iteration_limit");
}

TEST_CASE("never worthwhile to invest converges in two iterations") {
  // all lines energized and flat prices: a battery only adds losses
  NetworkData d = testing::tutorial_instance(2.0e4, 20.0, 7.0e6, 50.0).net.data();
  d.battery_candidates = {BatteryCandidate{1, 0.0, 4.0, 0.0, 4.0, true}};
  const Network net(d);
  const std::vector<Scenario> scenarios{default_scenario(net, 0, 24)};
  const auto risky = build_risky_set(scenarios, net.n_lines());
  const auto res = run(net, scenarios, risky, Scheme::BatteryPlusUnderground, exact_config());
  CHECK(res.termination == Termination::GapLimit);
  REQUIRE(res.iterations.size() == 2);
  CHECK(res.iterations.back().gap == 0.0);
  CHECK(res.decision == InvestmentDecision::zero(1, 0));
  // 24 h of 1 p.u. at $20/MWh
  CHECK(res.objective == doctest::Approx(0.048).epsilon(1e-12));
}

TEST_CASE("engine matches the enumerated monolithic optimum") {
  for (const auto& spec : testing::oracle_suite()) {
    if (spec.n_buses > 6) continue;
    const auto inst = testing::random_instance(spec);
    for (Scheme scheme : {Scheme::BatteryOnly, Scheme::BatteryPlusUnderground}) {
      const double oracle = monolithic_optimum(inst, scheme);
      const auto res = run(inst.net, inst.scenarios, inst.risky, scheme, exact_config());
      CHECK(res.termination == Termination::GapLimit);
      CHECK(std::abs(res.objective - oracle) <= 1e-5 * std::max(1.0, std::abs(oracle)));
      // the reported objective is reproduced by the reported decision
      const double inv = testing::investment_objective(inst.net, inst.risky, res.decision,
                                                       static_cast<int>(inst.scenarios.size()));
      double ops = 0.0;
      for (const auto& sch : res.schedules) ops += sch.cost.total();
      CHECK(inv + ops == doctest::Approx(res.objective).epsilon(1e-9));
      CHECK(res.investment_cost == doctest::Approx(inv).epsilon(1e-12));
    }
  }
}

TEST_CASE("bound sequences") {
  for (const auto& spec : testing::oracle_suite()) {
    if (spec.n_buses > 8) continue;
    const auto inst = testing::random_instance(spec);
    const auto cfg = exact_config();
    const auto res = run(inst.net, inst.scenarios, inst.risky, Scheme::BatteryPlusUnderground, cfg);
    REQUIRE_FALSE(res.iterations.empty());
    // the first master has no cuts
    CHECK(res.iterations.front().lower_bound == doctest::Approx(0.0));
    for (std::size_t k = 0; k < res.iterations.size(); ++k) {
      const auto& r = res.iterations[k];
      CHECK(r.k == static_cast<int>(k) + 1);
      if (k > 0) {
        CHECK(r.lower_bound >= res.iterations[k - 1].lower_bound - 1e-9 * (1.0 + std::abs(r.lower_bound)));
        CHECK(r.best_upper <= res.iterations[k - 1].best_upper);
      }
      // hand assembly of the bounds from the logged pieces
      const double z = std::accumulate(r.z_hat.begin(), r.z_hat.end(), 0.0);
      const double v = std::accumulate(r.scenario_cost.begin(), r.scenario_cost.end(), 0.0);
      CHECK(r.lower_bound == doctest::Approx(r.investment_cost + z).epsilon(1e-12));
      CHECK(r.upper_bound == doctest::Approx(r.investment_cost + v).epsilon(1e-12));
      CHECK(r.upper_bound >= r.lower_bound - 1e-6 * (1.0 + std::abs(r.upper_bound)));
      const double expected_gap = r.upper_bound > 0 ? (r.upper_bound - r.lower_bound) / r.upper_bound : 0.0;
      CHECK(r.gap == expected_gap);
      CHECK(r.investment_cost == doctest::Approx(testing::investment_objective(
                                     inst.net, inst.risky, r.x_hat, static_cast<int>(inst.scenarios.size())))
                                     .epsilon(1e-9));
    }
    const auto& last = res.iterations.back();
    if (last.gap <= cfg.epsilon) {
      CHECK(res.termination == Termination::GapLimit);
    } else {
      CHECK(res.termination == Termination::IterationLimit);
    }
    CHECK(res.objective == last.best_upper);
  }
}

TEST_CASE("iteration cap") {
  const auto inst = testing::random_instance({6, 2, 2, 3, 24, 107, false});
  EngineConfig cfg;
  cfg.max_iterations = 1;
  const auto res = run(inst.net, inst.scenarios, inst.risky, Scheme::BatteryPlusUnderground, cfg);
  REQUIRE(res.iterations.size() == 1);
  if (res.iterations[0].gap > cfg.epsilon) CHECK(res.termination == Termination::IterationLimit);
}

TEST_CASE("parallel and sequential runs agree exactly") {
  const auto inst = testing::random_instance({6, 4, 2, 3, 24, 515, false});
  auto seq_cfg = exact_config();
  auto par_cfg = seq_cfg;
  par_cfg.parallel = true;
  par_cfg.worker_count = 4;
  const auto a = run(inst.net, inst.scenarios, inst.risky, Scheme::BatteryPlusUnderground, seq_cfg);
  const auto b = run(inst.net, inst.scenarios, inst.risky, Scheme::BatteryPlusUnderground, par_cfg);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t k = 0; k < a.iterations.size(); ++k) {
    const auto& x = a.iterations[k];
    const auto& y = b.iterations[k];
    CHECK(x.lower_bound == y.lower_bound);
    CHECK(x.upper_bound == y.upper_bound);
    CHECK(x.best_upper == y.best_upper);
    CHECK(x.gap == y.gap);
    CHECK(x.z_hat == y.z_hat);
    CHECK(x.scenario_cost == y.scenario_cost);
    CHECK(x.x_hat == y.x_hat);
    CHECK(x.incumbent == y.incumbent);
  }
  CHECK(a.cuts == b.cuts);
  CHECK(a.decision == b.decision);
  CHECK(a.objective == b.objective);
}

TEST_CASE("cuts come back in scenario order and reproduce subproblem values") {
  const auto inst = testing::random_instance({5, 3, 1, 2, 24, 303, false});
  std::mt19937_64 rng(2);
  const auto x = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
  for (bool parallel : {false, true}) {
    const auto results = evaluate_subproblems(inst.net, inst.scenarios, inst.risky, x, parallel, 3);
    REQUIRE(results.size() == 3);
    const InvestmentLayout layout(inst.net, inst.risky);
    for (int w = 0; w < 3; ++w) {
      const auto& cut = results[static_cast<std::size_t>(w)].cut;
      CHECK(cut.scenario_id == w);
      CHECK(cut.duals.size() == layout.size());
      CHECK(cut.x_anchor == x);
      CHECK(cut.value >= 0.0);
      const auto sub = build_subproblem(inst.net, inst.scenarios[static_cast<std::size_t>(w)], inst.risky, x);
      const auto sol = lp::solve_lp(sub.lp);
      CHECK(cut.value == doctest::Approx(sol.objective).epsilon(1e-10));
      CHECK(results[static_cast<std::size_t>(w)].schedule.scenario == w);
    }
  }
}

TEST_CASE("empty scenario yields a zero cut") {
  const auto inst = testing::random_instance({4, 1, 1, 2, 24, 61, false});
  Scenario calm = default_scenario(inst.net, 0, 24);
  calm.demand.setZero();
  const std::vector<Scenario> one{calm};
  std::mt19937_64 rng(4);
  const auto x = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
  const auto results = evaluate_subproblems(inst.net, one, inst.risky, x, false);
  REQUIRE(results.size() == 1);
  const auto& cut = results[0].cut;
  CHECK(cut.value == doctest::Approx(0.0));
  const InvestmentLayout layout(inst.net, inst.risky);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].kind == VarKind::Underground) CHECK(cut.duals[k] == 0.0);
  }
}

TEST_CASE("cuts are valid subgradients of the scenario value") {
  std::mt19937_64 rng(12);
  for (const auto& spec : testing::oracle_suite()) {
    if (spec.n_buses > 6) continue;
    const auto inst = testing::random_instance(spec);
    const InvestmentLayout layout(inst.net, inst.risky);
    SubproblemPool pool(inst.net, inst.scenarios, inst.risky);
    for (int a = 0; a < 3; ++a) {
      const auto anchor = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
      const auto results = pool.evaluate(anchor, a + 1, false, 1);
      for (const auto& r : results) {
        for (int p = 0; p < 10; ++p) {
          const auto probe = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
          const double v = pool.value_at(r.cut.scenario_id, probe);
          const double model = r.cut.value + flat_dot(layout, r.cut.duals, probe, anchor);
          CHECK(v >= model - 1e-6 * (1.0 + std::abs(v)));
        }
        // the cut is tight at its anchor
        CHECK(pool.value_at(r.cut.scenario_id, anchor) == doctest::Approx(r.cut.value).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("warm pool gives the same values as fresh solves") {
  const auto inst = testing::random_instance({5, 2, 2, 2, 24, 77, true});
  SubproblemPool pool(inst.net, inst.scenarios, inst.risky);
  std::mt19937_64 rng(6);
  for (int k = 1; k <= 5; ++k) {
    const auto x = testing::random_feasible_decision(inst.net, inst.risky, Scheme::BatteryPlusUnderground, rng);
    const auto warm = pool.evaluate(x, k, false, 1);
    const auto cold = evaluate_subproblems(inst.net, inst.scenarios, inst.risky, x, false);
    for (std::size_t w = 0; w < warm.size(); ++w) {
      CHECK(warm[w].cut.value == doctest::Approx(cold[w].cut.value).epsilon(1e-9));
      CHECK(warm[w].cut.iteration == k);
    }
  }
}

TEST_CASE("scenario ids must be positional") {
  const auto inst = testing::random_instance({4, 2, 1, 1, 24, 5, false});
  auto scenarios = inst.scenarios;
  std::swap(scenarios[0], scenarios[1]);
  CHECK_THROWS_AS(run(inst.net, scenarios, inst.risky, Scheme::BatteryOnly), FormulationError);
}

TEST_CASE("iteration log as CSV") {
  const auto inst = testing::random_instance({4, 2, 1, 2, 24, 103, true});
  const auto res = run(inst.net, inst.scenarios, inst.risky, Scheme::BatteryPlusUnderground, exact_config());
  std::ostringstream out;
  write_iteration_csv(res.iterations, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,LB,UB,gap,master_time_s,max_sub_time_s,sum_sub_time_s");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
  }
  CHECK(rows == static_cast<int>(res.iterations.size()));
}
