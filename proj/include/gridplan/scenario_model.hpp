#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridplan/grid_model.hpp"

namespace gridplan {

/// One representative day. Scenarios are independent of each other.
struct Scenario {
  int id = 0;
  std::string label;
  int n_steps = 24;
  std::vector<bool> energized;      // per line id
  Eigen::MatrixXd demand;           // bus x t, p.u.
  Eigen::MatrixXd gen_caps;         // generator x t, p.u.
  std::vector<double> shed_cost;    // $/MWh per t
  Eigen::MatrixXd gen_cost;         // generator x t, $/MWh
  std::vector<double> line_risk;    // per line id; empty when unknown

  bool is_energized(int line) const { return energized.at(static_cast<std::size_t>(line)); }
  std::set<int> energized_lines() const;
  std::set<int> deenergized_lines() const;
};

/// Candidate lines for undergrounding, ascending by line id.
struct RiskyLineSet {
  std::vector<int> lines;

  bool contains(int line) const;
  /// Position of `line` in `lines`, or -1.
  int index_of(int line) const;
  std::size_t size() const { return lines.size(); }
  bool empty() const { return lines.empty(); }
  bool operator==(const RiskyLineSet&) const = default;
};

/// Lines whose risk is at or below `threshold`. Throws MissingRisk for a line
/// of `net` without an entry in `risks`.
std::set<int> apply_risk_threshold(const Network& net, const std::map<int, double>& risks,
                                   double threshold);

/// Union over scenarios of the de-energized lines.
RiskyLineSet build_risky_set(const std::vector<Scenario>& scenarios, int n_lines);

/// Scenario with every line energized and demand/capacity/costs taken from
/// the network defaults.
Scenario default_scenario(const Network& net, int id, int n_steps = 24);

std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const Network& net);
std::vector<Scenario> parse_scenarios(const nlohmann::json& doc, const Network& net,
                                      const std::string& source = "<memory>");

/// Checks dimensions and id references of a scenario against `net`.
void validate_scenario(const Scenario& s, const Network& net);

}  // namespace gridplan
