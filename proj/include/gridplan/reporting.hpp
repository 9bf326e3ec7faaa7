#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridplan/benders.hpp"
#include "gridplan/formulation.hpp"

namespace gridplan {

struct ScenarioShed {
  int scenario = 0;
  std::string label;
  double shed_mwh = 0.0;
  double demand_mwh = 0.0;
  double percent = 0.0;  // 100 * shed / demand
};

/// Cost components. Capital is undiscounted; operations are summed over the
/// scenario days. All values in M$.
struct CostBreakdown {
  double battery_capital = 0.0;
  double underground_capital = 0.0;
  double load_shedding = 0.0;
  double generation = 0.0;
  double battery_operation = 0.0;
  int n_scenario_days = 1;
  double battery_lifetime_years = 10.0;
  double underground_lifetime_years = 40.0;

  double battery_daily() const { return battery_capital / (battery_lifetime_years * 365.0); }
  double underground_daily() const {
    return underground_capital / (underground_lifetime_years * 365.0);
  }
  /// Investment term as it enters the objective.
  double amortized_investment() const {
    return (battery_daily() + underground_daily()) * n_scenario_days;
  }
  double operations() const { return load_shedding + generation + battery_operation; }
  double objective() const { return amortized_investment() + operations(); }
};

/// Monetary value rounded to two decimals, as printed in the cost tables.
std::string format_musd(double value);

/// capital / (lifetime_years * 365).
double daily_investment(double capital, double lifetime_years);

std::vector<ScenarioShed> shed_summary(const Network& net, const std::vector<Scenario>& scenarios,
                                       const std::vector<OperationalSchedule>& schedules);

CostBreakdown cost_breakdown(const Network& net, const RiskyLineSet& risky,
                             const InvestmentDecision& decision,
                             const std::vector<OperationalSchedule>& schedules);

/// component,total_musd,daily_musd. Investment rows print "n.a." when zero.
void write_costs_csv(const CostBreakdown& costs, std::ostream& out);

/// GeoJSON FeatureCollection of batteries and lines. Throws MissingCoordinates
/// when a bus lacks coordinates.
nlohmann::json placement_geojson(const Network& net, const RiskyLineSet& risky,
                                 const InvestmentDecision& decision,
                                 const std::vector<Scenario>& scenarios);
void emit_placement_map(const Network& net, const RiskyLineSet& risky,
                        const InvestmentDecision& decision, const std::vector<Scenario>& scenarios,
                        const std::filesystem::path& path);

/// Map drawing with battery circles scaled by capacity and undergrounded
/// lines highlighted.
void write_placement_svg(const Network& net, const RiskyLineSet& risky,
                         const InvestmentDecision& decision, std::ostream& out);

/// scenario,bus,t_hour,soe_pu for every battery with nonzero energy.
void emit_soe_traces(const Network& net, const InvestmentDecision& decision,
                     const std::vector<OperationalSchedule>& schedules, std::ostream& out);

struct BaselineSummary {
  double objective = 0.0;
  std::vector<ScenarioShed> shed;
  CostBreakdown costs;
};

struct RunReport {
  std::string scheme;
  std::string mode;
  long seed = 0;
  std::vector<int> risky_lines;
  InvestmentDecision decision;
  double objective = 0.0;  // M$
  std::vector<OperationalSchedule> schedules;
  std::vector<ScenarioShed> shed;
  CostBreakdown costs;
  std::vector<IterationRecord> iterations;
  std::optional<Termination> termination;
  std::optional<double> monolithic_objective;
  std::optional<double> benders_objective;
  std::optional<double> relative_difference;
  std::optional<long> monolithic_nodes;
  std::optional<BaselineSummary> baseline;
  double monolithic_time_s = 0.0;
  double benders_time_s = 0.0;
  double wall_time_s = 0.0;
};

nlohmann::json report_to_json(const Network& net, const RunReport& report);

/// Writes report.json, iterations.csv, placements.geojson, soe.csv, costs.csv
/// and, when `svg` is set, placements.svg.
void write_report_files(const Network& net, const RiskyLineSet& risky,
                        const std::vector<Scenario>& scenarios, const RunReport& report,
                        const std::filesystem::path& dir, bool svg = false);

}  // namespace gridplan
