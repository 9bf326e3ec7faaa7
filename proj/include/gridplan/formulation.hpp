#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridplan/grid_model.hpp"
#include "gridplan/mip.hpp"
#include "gridplan/scenario_model.hpp"
#include "gridplan/simplex.hpp"

namespace gridplan {

/// Objective values produced by the builders are in millions of dollars.
inline constexpr double kDollarsPerObjectiveUnit = 1.0e6;

enum class Scheme : std::uint8_t { BatteryOnly, BatteryPlusUnderground };

enum class VarKind : std::uint8_t {
  BattEnergy,
  BattPower,
  BattPlaced,
  Underground,
  ScenarioCost,
  Shed,
  Gen,
  Charge,
  Discharge,
  Soe,
  Flow,
  Angle,
};

enum class RowKind : std::uint8_t {
  EnergyCap,
  EnergyMin,
  PowerMin,
  SoeInit,
  SoeDynamics,
  SoeTerminal,
  SoeMin,
  SoeMax,
  ChargeCap,
  DischargeCap,
  ChargeDischargeCap,
  FlowDef,
  AngleDiffMax,
  AngleDiffMin,
  UgFlowMin,
  UgFlowMax,
  UgAngleMax,
  UgAngleMin,
  UgFlowDefMax,
  UgFlowDefMin,
  Balance,
  Linking,
  Cut,
};

/// Semantic name of a column. `scenario` is -1 for first-stage columns;
/// `entity` is a bus, line, generator, candidate or risky-set index depending
/// on `kind`.
struct VarKey {
  VarKind kind = VarKind::Shed;
  int scenario = -1;
  int entity = -1;
  int t = -1;
  auto operator<=>(const VarKey&) const = default;
};

struct RowKey {
  RowKind kind = RowKind::Balance;
  int scenario = -1;
  int entity = -1;
  int t = -1;
  auto operator<=>(const RowKey&) const = default;
};

std::string to_string(VarKind k);
std::string to_string(RowKind k);

/// Bijection between semantic keys and LP column / row indices.
class VariableIndexMap {
 public:
  int add_column(const VarKey& key);
  int add_row(const RowKey& key, bool linking = false);

  std::optional<int> column(const VarKey& key) const;
  std::optional<int> row(const RowKey& key) const;
  int column_at(const VarKey& key) const;  // throws FormulationError if absent

  const VarKey& column_key(int col) const { return col_keys_.at(static_cast<std::size_t>(col)); }
  const RowKey& row_key(int row) const { return row_keys_.at(static_cast<std::size_t>(row)); }
  bool is_linking(int row) const { return linking_.at(static_cast<std::size_t>(row)); }
  std::vector<int> linking_rows() const;

  int n_columns() const { return static_cast<int>(col_keys_.size()); }
  int n_rows() const { return static_cast<int>(row_keys_.size()); }

  /// Line ids behind the undergrounding entries, in risky-set order.
  const std::vector<int>& risky_lines() const { return risky_lines_; }
  void set_risky_lines(std::vector<int> lines) { risky_lines_ = std::move(lines); }

 private:
  std::vector<int> risky_lines_;
  std::map<VarKey, int> col_index_;
  std::map<RowKey, int> row_index_;
  std::vector<VarKey> col_keys_;
  std::vector<RowKey> row_keys_;
  std::vector<bool> linking_;
};

/// Ordering of the investment vector X: per candidate energy, (power when not
/// tied), placement; then one undergrounding entry per risky line.
class InvestmentLayout {
 public:
  struct Entry {
    VarKind kind;
    int entity;  // candidate index or position in the risky set
  };

  InvestmentLayout(const Network& net, const RiskyLineSet& risky);

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& operator[](std::size_t k) const { return entries_[k]; }

  std::vector<double> flatten(const InvestmentDecision& d) const;
  InvestmentDecision unflatten(const std::vector<double>& x) const;

  /// Objective coefficient of each entry (M$ per unit, amortized daily cost
  /// times `n_scenario_days`).
  std::vector<double> costs(int n_scenario_days) const;

  bool is_binary(std::size_t k) const {
    return entries_[k].kind == VarKind::BattPlaced || entries_[k].kind == VarKind::Underground;
  }

 private:
  const Network* net_;
  const RiskyLineSet* risky_;
  std::vector<Entry> entries_;
};

struct FormulationOptions {
  /// Bus angles are assumed to stay within +-theta_span of their reference.
  double theta_span = std::numbers::pi;
};

struct BuiltLp {
  lp::LinearProgram lp;
  VariableIndexMap map;
};

struct BuiltMip {
  mip::MixedIntegerProgram mip;
  VariableIndexMap map;
};

/// One Benders optimality cut: Z_w >= value + duals . (X - x_anchor).
struct CutData {
  int scenario_id = 0;
  int iteration = 0;
  InvestmentDecision x_anchor;
  double value = 0.0;          // M$
  std::vector<double> duals;   // aligned with InvestmentLayout
  bool operator==(const CutData&) const = default;
};

/// Extensive form over all scenarios.
BuiltMip build_monolithic(const Network& net, const std::vector<Scenario>& scenarios,
                          const RiskyLineSet& risky, Scheme scheme,
                          const FormulationOptions& opts = {});

/// Operational LP for one scenario with the investment fixed by linking rows.
BuiltLp build_subproblem(const Network& net, const Scenario& scenario, const RiskyLineSet& risky,
                         const InvestmentDecision& x_hat, const FormulationOptions& opts = {});

/// Rewrites only the linking right-hand sides of a subproblem built earlier.
void set_linking_rhs(BuiltLp& sub, const std::vector<double>& x_hat_flat);

/// Benders master over X and one Z per scenario.
BuiltMip build_master(const Network& net, const RiskyLineSet& risky, int n_scenarios,
                      const std::vector<CutData>& cuts, Scheme scheme);

/// Energy stored after one step.
double soe_update(double soe, double charge, double discharge, const BatteryPhysics& physics);

struct OperationalCost {
  double load_shedding = 0.0;     // M$
  double generation = 0.0;        // M$
  double battery_operation = 0.0; // M$
  double total() const { return load_shedding + generation + battery_operation; }
};

struct OperationalSchedule {
  int scenario = 0;
  int n_steps = 0;
  Eigen::MatrixXd shed;       // bus x t
  Eigen::MatrixXd gen;        // generator x t
  Eigen::MatrixXd charge;     // candidate x t
  Eigen::MatrixXd discharge;  // candidate x t
  Eigen::MatrixXd soe;        // candidate x (t + 1)
  Eigen::MatrixXd flow;       // line x t, zero for lines without a flow column
  std::vector<bool> has_flow;
  Eigen::MatrixXd angle;      // bus x t
  OperationalCost cost;
};

/// Reads one scenario's operational variables. Throws ExtractionError when the
/// solution is not optimal.
OperationalSchedule extract_schedule(const lp::LpSolution& solution, const VariableIndexMap& map,
                                     const Network& net, const Scenario& scenario,
                                     const FormulationOptions& opts = {});
OperationalSchedule extract_schedule(const std::vector<double>& x, const VariableIndexMap& map,
                                     const Network& net, const Scenario& scenario,
                                     const FormulationOptions& opts = {});

/// Reads X from any model built here (monolithic, master or subproblem).
InvestmentDecision extract_decision(const std::vector<double>& x, const VariableIndexMap& map,
                                    const Network& net, const RiskyLineSet& risky);

/// Buses whose angle is pinned to zero in a scenario: one per connected
/// component of the graph formed by energized lines and risky lines.
std::vector<int> reference_buses(const Network& net, const Scenario& scenario,
                                 const RiskyLineSet& risky);

/// Operational cost recomputed from a schedule, in M$.
OperationalCost operational_cost(const Network& net, const Scenario& scenario,
                                 const OperationalSchedule& schedule);

}  // namespace gridplan
