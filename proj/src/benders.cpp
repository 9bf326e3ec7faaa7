#include "gridplan/benders.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include <spdlog/spdlog.h>

#include "gridplan/errors.hpp"

namespace gridplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void EngineConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (worker_count < 1) throw std::invalid_argument("worker_count must be at least 1");
}

const char* to_string(Termination t) {
  return t == Termination::GapLimit ? "gap_limit" : "iteration_limit";
}

struct SubproblemPool::Slot {
  const Scenario* scenario = nullptr;
  BuiltLp model;
  lp::Basis basis;
};

SubproblemPool::SubproblemPool(const Network& net, const std::vector<Scenario>& scenarios,
                               const RiskyLineSet& risky, FormulationOptions formulation,
                               lp::SimplexOptions simplex)
    : net_(net),
      scenarios_(scenarios),
      risky_(risky),
      formulation_(formulation),
      simplex_(simplex),
      layout_(net, risky) {
  const auto zero = InvestmentDecision::zero(net.battery_candidates().size(), risky.size());
  for (std::size_t w = 0; w < scenarios.size(); ++w) {
    if (scenarios[w].id != static_cast<int>(w)) {
      throw FormulationError("scenario ids must be 0..n-1 in order");
    }
    auto slot = std::make_unique<Slot>();
    slot->scenario = &scenarios[w];
    slot->model = build_subproblem(net, scenarios[w], risky, zero, formulation);
    slots_.push_back(std::move(slot));
  }
}

SubproblemPool::~SubproblemPool() = default;

SubproblemResult SubproblemPool::solve_slot(Slot& slot, const std::vector<double>& flat, int iteration) {
  const auto start = Clock::now();
  set_linking_rhs(slot.model, flat);
  const auto sol = slot.basis.empty() ? lp::solve_lp(slot.model.lp, simplex_)
                                      : lp::solve_lp_warm(slot.model.lp, slot.basis, simplex_);
  const int w = slot.scenario->id;
  if (sol.status != lp::LpStatus::Optimal) {
    throw SolverFailure("iteration " + std::to_string(iteration) + ", scenario " + std::to_string(w) +
                        ": operational subproblem is " +
                        (sol.status == lp::LpStatus::Infeasible ? "infeasible" : "unbounded"));
  }
  slot.basis = sol.basis;
  SubproblemResult r;
  r.cut.scenario_id = w;
  r.cut.iteration = iteration;
  r.cut.x_anchor = layout_.unflatten(flat);
  r.cut.value = sol.objective;
  r.cut.duals.assign(layout_.size(), 0.0);
  for (int row : slot.model.map.linking_rows()) {
    const auto k = static_cast<std::size_t>(slot.model.map.row_key(row).entity);
    r.cut.duals[k] = sol.duals[static_cast<std::size_t>(row)];
  }
  r.schedule = extract_schedule(sol, slot.model.map, net_, *slot.scenario, formulation_);
  r.lp_iterations = sol.iterations;
  r.solve_time_s = seconds_since(start);
  return r;
}

std::vector<SubproblemResult> SubproblemPool::evaluate(const InvestmentDecision& x_hat, int iteration,
                                                       bool parallel, int worker_count) {
  const auto flat = layout_.flatten(x_hat);
  std::vector<SubproblemResult> results(slots_.size());
  const int n = static_cast<int>(slots_.size());
  const int workers = parallel ? std::clamp(worker_count, 1, std::max(1, n)) : 1;
  if (workers == 1) {
    for (int w = 0; w < n; ++w) results[w] = solve_slot(*slots_[w], flat, iteration);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  int failed_at = n;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int w = next++; w < n; w = next++) {
      try {
        results[w] = solve_slot(*slots_[w], flat, iteration);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (w < failed_at) {  // report the lowest failing scenario, as a sequential run would
          failed_at = w;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

double SubproblemPool::value_at(int scenario, const InvestmentDecision& x_hat) const {
  const Slot& slot = *slots_.at(static_cast<std::size_t>(scenario));
  BuiltLp copy = slot.model;
  set_linking_rhs(copy, layout_.flatten(x_hat));
  const auto sol = slot.basis.empty() ? lp::solve_lp(copy.lp, simplex_)
                                      : lp::solve_lp_warm(copy.lp, slot.basis, simplex_);
  if (sol.status != lp::LpStatus::Optimal) {
    throw SolverFailure("scenario " + std::to_string(scenario) + ": subproblem not optimal at probe");
  }
  return sol.objective;
}

std::vector<SubproblemResult> evaluate_subproblems(const Network& net,
                                                   const std::vector<Scenario>& scenarios,
                                                   const RiskyLineSet& risky,
                                                   const InvestmentDecision& x_hat, bool parallel,
                                                   int worker_count) {
  SubproblemPool pool(net, scenarios, risky);
  return pool.evaluate(x_hat, 0, parallel, worker_count);
}

Bounds compute_bounds(double investment_cost, const std::vector<double>& z_hat,
                      const std::vector<double>& subproblem_values) {
  Bounds b;
  b.lower = investment_cost + std::accumulate(z_hat.begin(), z_hat.end(), 0.0);
  b.upper = investment_cost + std::accumulate(subproblem_values.begin(), subproblem_values.end(), 0.0);
  return b;
}

double relative_gap(const Bounds& b) {
  if (b.upper <= 0.0) return 0.0;
  return (b.upper - b.lower) / b.upper;
}

PlanResult run(const Network& net, const std::vector<Scenario>& scenarios, const RiskyLineSet& risky,
               Scheme scheme, const EngineConfig& config) {
  config.validate();
  if (scenarios.empty()) throw FormulationError("at least one scenario is required");
  validate_complete_recourse(net);
  const auto start = Clock::now();
  const int n = static_cast<int>(scenarios.size());
  const InvestmentLayout layout(net, risky);
  const auto invest_cost = layout.costs(n);
  SubproblemPool pool(net, scenarios, risky, config.formulation, config.subproblem);

  PlanResult result;
  double best_upper = lp::kInf;
  for (int k = 1; k <= config.max_iterations; ++k) {
    IterationRecord rec;
    rec.k = k;

    const auto master_start = Clock::now();
    const auto master = build_master(net, risky, n, result.cuts, scheme);
    mip::MipSolution msol;
    try {
      msol = mip::solve_mip(master.mip, config.master);
    } catch (const SolverError& e) {
      throw SolverFailure("iteration " + std::to_string(k) + ": master failed: " + e.what());
    }
    if (msol.status == mip::MipStatus::Infeasible || msol.x.empty()) {
      throw SolverFailure("iteration " + std::to_string(k) + ": master problem has no solution");
    }
    rec.master_time_s = seconds_since(master_start);
    rec.x_hat = extract_decision(msol.x, master.map, net, risky);
    const auto flat = layout.flatten(rec.x_hat);
    rec.investment_cost = std::inner_product(flat.begin(), flat.end(), invest_cost.begin(), 0.0);
    for (int w = 0; w < n; ++w) {
      rec.z_hat.push_back(msol.x[static_cast<std::size_t>(
          master.map.column_at(VarKey{VarKind::ScenarioCost, w, -1, -1}))]);
    }

    const auto sub_start = Clock::now();
    auto subs = pool.evaluate(rec.x_hat, k, config.parallel, config.worker_count);
    rec.subproblem_wall_s = seconds_since(sub_start);
    for (auto& s : subs) {
      rec.scenario_cost.push_back(s.cut.value);
      rec.subproblem_times_s.push_back(s.solve_time_s);
    }

    const Bounds b = compute_bounds(rec.investment_cost, rec.z_hat, rec.scenario_cost);
    rec.lower_bound = b.lower;
    rec.upper_bound = b.upper;
    rec.gap = relative_gap(b);
    if (b.upper < best_upper) {
      best_upper = b.upper;
      result.decision = rec.x_hat;
      result.objective = b.upper;
      result.investment_cost = rec.investment_cost;
      result.schedules.clear();
      for (auto& s : subs) result.schedules.push_back(s.schedule);
    }
    rec.best_upper = best_upper;
    rec.incumbent = result.decision;
    for (auto& s : subs) result.cuts.push_back(std::move(s.cut));
    spdlog::info("benders k={} LB={:.6f} UB={:.6f} best={:.6f} gap={:.3e}", k, rec.lower_bound,
                 rec.upper_bound, rec.best_upper, rec.gap);
    result.iterations.push_back(std::move(rec));
    if (result.iterations.back().gap <= config.epsilon) {
      result.termination = Termination::GapLimit;
      break;
    }
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

void write_iteration_csv(const std::vector<IterationRecord>& log, std::ostream& out) {
  const auto old_prec = out.precision(12);
  out << "k,LB,UB,gap,master_time_s,max_sub_time_s,sum_sub_time_s\n";
  for (const auto& r : log) {
    double mx = 0.0, sum = 0.0;
    for (double t : r.subproblem_times_s) {
      mx = std::max(mx, t);
      sum += t;
    }
    out << r.k << ',' << r.lower_bound << ',' << r.upper_bound << ',' << r.gap << ',' << r.master_time_s
        << ',' << mx << ',' << sum << '\n';
  }
  out.precision(old_prec);
}

}  // namespace gridplan
