#include "gridplan/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gridplan/errors.hpp"

namespace gridplan {

namespace {

using Clock = std::chrono::steady_clock;

void configure_logging() {
  if (!spdlog::get("plan")) {
    auto logger = spdlog::stderr_color_mt("plan");
    spdlog::set_default_logger(logger);
  }
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("PLAN_LOG"); env && *env) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

const char* scheme_name(Scheme s) {
  return s == Scheme::BatteryOnly ? "battery-only" : "both-investments";
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Monolithic: return "monolithic";
    case RunMode::Benders: return "benders";
    case RunMode::Both: return "both";
  }
  return "?";
}

struct Solved {
  InvestmentDecision decision;
  double objective = 0.0;
  std::vector<OperationalSchedule> schedules;
  double time_s = 0.0;
};

Solved solve_monolithic(const Network& net, const std::vector<Scenario>& scenarios, const RiskyLineSet& risky,
                        Scheme scheme, const EngineConfig& engine, long* nodes) {
  const auto start = Clock::now();
  const auto built = build_monolithic(net, scenarios, risky, scheme, engine.formulation);
  mip::MipOptions opts = engine.master;
  opts.lp = engine.subproblem;
  const auto sol = mip::solve_mip(built.mip, opts);
  if (sol.x.empty()) throw SolverFailure("monolithic problem has no feasible solution");
  if (sol.status != mip::MipStatus::Optimal) {
    spdlog::warn("monolithic solve stopped early with gap {:.3e}", sol.gap);
  }
  Solved out;
  out.decision = extract_decision(sol.x, built.map, net, risky);
  out.objective = sol.objective;
  for (const auto& s : scenarios) {
    out.schedules.push_back(extract_schedule(sol.x, built.map, net, s, engine.formulation));
  }
  *nodes = sol.nodes_explored;
  out.time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace

BaselineSummary evaluate_baseline(const Network& net, const std::vector<Scenario>& scenarios,
                                  const RiskyLineSet& risky) {
  const auto zero = InvestmentDecision::zero(net.battery_candidates().size(), risky.size());
  SubproblemPool pool(net, scenarios, risky);
  const auto results = pool.evaluate(zero, 0, false, 1);
  BaselineSummary b;
  std::vector<OperationalSchedule> schedules;
  for (const auto& r : results) {
    b.objective += r.cut.value;
    schedules.push_back(r.schedule);
  }
  b.shed = shed_summary(net, scenarios, schedules);
  b.costs = cost_breakdown(net, risky, zero, schedules);
  return b;
}

RunReport execute(const RunConfig& config, const Network& net, const std::vector<Scenario>& scenarios,
                  const RiskyLineSet& risky) {
  const auto start = Clock::now();
  RunReport report;
  report.scheme = scheme_name(config.scheme);
  report.mode = mode_name(config.mode);
  report.seed = config.seed;
  report.risky_lines = risky.lines;

  std::optional<Solved> mono;
  if (config.mode != RunMode::Benders) {
    long nodes = 0;
    mono = solve_monolithic(net, scenarios, risky, config.scheme, config.engine, &nodes);
    report.monolithic_objective = mono->objective;
    report.monolithic_nodes = nodes;
    report.monolithic_time_s = mono->time_s;
    report.decision = mono->decision;
    report.objective = mono->objective;
    report.schedules = mono->schedules;
  }
  if (config.mode != RunMode::Monolithic) {
    auto plan = run(net, scenarios, risky, config.scheme, config.engine);
    report.benders_objective = plan.objective;
    report.benders_time_s = plan.wall_time_s;
    report.termination = plan.termination;
    report.iterations = std::move(plan.iterations);
    report.decision = std::move(plan.decision);
    report.objective = plan.objective;
    report.schedules = std::move(plan.schedules);
  }
  if (report.monolithic_objective && report.benders_objective) {
    const double m = *report.monolithic_objective;
    report.relative_difference = std::abs(*report.benders_objective - m) / std::max(std::abs(m), 1e-12);
  }
  report.shed = shed_summary(net, scenarios, report.schedules);
  report.costs = cost_breakdown(net, risky, report.decision, report.schedules);
  if (config.baseline) report.baseline = evaluate_baseline(net, scenarios, risky);
  report.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

int plan_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Battery siting and line undergrounding planner for de-energization scenarios", "plan"};
  RunConfig config;
  std::string network, scenarios_path, out_dir = "plan_out";
  const std::map<std::string, Scheme> schemes{{"battery-only", Scheme::BatteryOnly},
                                              {"both-investments", Scheme::BatteryPlusUnderground}};
  const std::map<std::string, RunMode> modes{
      {"monolithic", RunMode::Monolithic}, {"benders", RunMode::Benders}, {"both", RunMode::Both}};
  app.add_option("--network", network, "Network JSON file")->required();
  app.add_option("--scenarios", scenarios_path, "Scenario JSON file")->required();
  app.add_option("--scheme", config.scheme, "battery-only or both-investments")
      ->transform(CLI::CheckedTransformer(schemes, CLI::ignore_case))
      ->default_str("both-investments");
  app.add_option("--mode", config.mode, "monolithic, benders or both")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
      ->default_str("benders");
  app.add_option("--epsilon", config.engine.epsilon, "Relative gap tolerance")->capture_default_str();
  app.add_option("--max-iters", config.engine.max_iterations, "Benders iteration cap")->capture_default_str();
  app.add_option("--workers", config.engine.worker_count, "Concurrent subproblem solves")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--baseline", config.baseline, "Also evaluate the no-investment case");
  app.add_flag("--svg", config.svg, "Also write placements.svg");
  app.add_option("--seed", config.seed, "Seed recorded in the report")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  config.network_path = network;
  config.scenarios_path = scenarios_path;
  config.output_dir = out_dir;
  config.engine.parallel = config.engine.worker_count > 1;

  try {
    config.engine.validate();
    const Network net = load_network(config.network_path);
    const auto scenarios = load_scenarios(config.scenarios_path, net);
    const auto risky = build_risky_set(scenarios, net.n_lines());
    const auto report = execute(config, net, scenarios, risky);
    write_report_files(net, risky, scenarios, report, config.output_dir, config.svg);

    out << "objective " << report.objective << " M$ (" << report.mode << ", " << report.scheme << ")\n";
    if (report.termination) {
      out << "benders " << to_string(*report.termination) << " after " << report.iterations.size()
          << " iterations\n";
    }
    if (report.relative_difference) out << "relative difference " << *report.relative_difference << '\n';
    out << "wrote " << config.output_dir.string() << '\n';
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gridplan
