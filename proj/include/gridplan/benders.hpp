#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "gridplan/formulation.hpp"
#include "gridplan/mip.hpp"

namespace gridplan {

inline mip::MipOptions tight_master_options() {
  mip::MipOptions o;
  o.mip_gap = 1e-9;
  return o;
}

struct EngineConfig {
  double epsilon = 1e-4;  // relative gap tolerance
  int max_iterations = 20;
  bool parallel = false;
  int worker_count = 1;
  mip::MipOptions master = tight_master_options();
  lp::SimplexOptions subproblem;
  FormulationOptions formulation;

  /// Throws std::invalid_argument on a nonpositive epsilon or iteration cap.
  void validate() const;
};

enum class Termination : std::uint8_t { GapLimit, IterationLimit };

const char* to_string(Termination t);

struct IterationRecord {
  int k = 0;
  double lower_bound = 0.0;  // M$
  double upper_bound = 0.0;  // M$, at this iteration's master proposal
  double best_upper = 0.0;   // M$
  double gap = 0.0;          // (upper_bound - lower_bound) / upper_bound
  double investment_cost = 0.0;
  std::vector<double> z_hat;          // master scenario estimates
  std::vector<double> scenario_cost;  // subproblem values
  double master_time_s = 0.0;
  std::vector<double> subproblem_times_s;
  double subproblem_wall_s = 0.0;  // whole evaluation phase
  InvestmentDecision x_hat;        // master proposal
  InvestmentDecision incumbent;    // best (lowest upper bound) so far
};

struct SubproblemResult {
  CutData cut;
  OperationalSchedule schedule;
  double solve_time_s = 0.0;
  long lp_iterations = 0;
};

struct PlanResult {
  InvestmentDecision decision;
  double objective = 0.0;        // M$, best upper bound
  double investment_cost = 0.0;  // M$
  std::vector<OperationalSchedule> schedules;
  std::vector<IterationRecord> iterations;
  std::vector<CutData> cuts;
  Termination termination = Termination::IterationLimit;
  double wall_time_s = 0.0;
};

/// Per-scenario operational LPs kept alive between iterations so each solve
/// can start from the previous optimal basis.
class SubproblemPool {
 public:
  SubproblemPool(const Network& net, const std::vector<Scenario>& scenarios, const RiskyLineSet& risky,
                 FormulationOptions formulation = {}, lp::SimplexOptions simplex = {});
  ~SubproblemPool();
  SubproblemPool(const SubproblemPool&) = delete;
  SubproblemPool& operator=(const SubproblemPool&) = delete;

  /// Solves every scenario at `x_hat`. Results are ordered by scenario id.
  /// Throws SolverFailure naming the scenario on an infeasible subproblem.
  std::vector<SubproblemResult> evaluate(const InvestmentDecision& x_hat, int iteration, bool parallel,
                                         int worker_count);

  /// Value of one scenario's subproblem at `x_hat` without touching the
  /// stored warm-start bases.
  double value_at(int scenario, const InvestmentDecision& x_hat) const;

 private:
  struct Slot;
  SubproblemResult solve_slot(Slot& slot, const std::vector<double>& flat, int iteration);

  const Network& net_;
  const std::vector<Scenario>& scenarios_;
  const RiskyLineSet& risky_;
  FormulationOptions formulation_;
  lp::SimplexOptions simplex_;
  InvestmentLayout layout_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

std::vector<SubproblemResult> evaluate_subproblems(const Network& net,
                                                   const std::vector<Scenario>& scenarios,
                                                   const RiskyLineSet& risky,
                                                   const InvestmentDecision& x_hat, bool parallel,
                                                   int worker_count = 1);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// LB = C.X + sum Z_w, UB = C.X + sum v_w.
Bounds compute_bounds(double investment_cost, const std::vector<double>& z_hat,
                      const std::vector<double>& subproblem_values);

/// (UB - LB) / UB, or 0 when UB is not positive.
double relative_gap(const Bounds& b);

PlanResult run(const Network& net, const std::vector<Scenario>& scenarios, const RiskyLineSet& risky,
               Scheme scheme, const EngineConfig& config = {});

/// k,LB,UB,gap,master_time_s,max_sub_time_s,sum_sub_time_s
void write_iteration_csv(const std::vector<IterationRecord>& log, std::ostream& out);

}  // namespace gridplan
