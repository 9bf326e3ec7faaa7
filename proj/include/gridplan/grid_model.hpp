#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridplan {

/// System per-unit base. All in-memory powers are p.u. of 100 MW and all
/// energies p.u. of 100 MWh.
inline constexpr double kSystemBaseMva = 100.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct Bus {
  int id = 0;
  std::string name;
  std::optional<GeoPoint> coordinates;
  bool is_reference = false;
  bool operator==(const Bus&) const = default;
};

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double susceptance_b = 0.0;  // p.u.
  double flow_limit = 0.0;     // p.u.
  double angle_min = 0.0;      // rad
  double angle_max = 0.0;      // rad
  double length_miles = 0.0;
  std::vector<double> risk_series;  // one value per scenario day, may be empty
  bool operator==(const Line&) const = default;
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;
  // Either one constant value or one value per timestep (p.u.).
  std::vector<double> p_max_series;
  double cost_coeff = 0.0;  // $/MWh

  double p_max_at(int t) const;
  bool operator==(const Generator&) const = default;
};

struct Load {
  int id = 0;
  int bus = 0;
  // Either one constant value or one value per timestep (p.u.).
  std::vector<double> demand_series;

  double demand_at(int t) const;
  bool operator==(const Load&) const = default;
};

struct BatteryCandidate {
  int bus = 0;
  double e_min = 0.0;  // p.u. MWh
  double e_max = 4.0;
  double p_min = 0.0;  // p.u. MW
  double p_max = 4.0;
  bool tie_power_to_energy = true;
  bool operator==(const BatteryCandidate&) const = default;
};

struct CostParameters {
  double c_energy = 1.0e6;         // $/MWh of capacity
  double c_power = 1.0e6;          // $/MW
  double c_fixed = 1.0e5;          // $/site
  double c_underground = 7.0e6;    // $/mile
  double c_loadshed = 2.0e4;       // $/MWh
  double lambda_op = 1.0;          // $/MWh of charge + discharge
  double battery_lifetime_years = 10.0;
  double underground_lifetime_years = 40.0;
  bool operator==(const CostParameters&) const = default;
};

struct BatteryPhysics {
  double eta = 0.95;
  double gamma = 0.999958;
  double alpha = 0.1;
  double dt_seconds = 3600.0;
  double initial_soe_fraction = 0.5;
  bool enforce_terminal_soe = true;
  bool operator==(const BatteryPhysics&) const = default;
};

/// Plain aggregate used to construct a Network. Quantities are already p.u.
struct NetworkData {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;
  std::vector<BatteryCandidate> battery_candidates;
  CostParameters costs;
  BatteryPhysics battery_physics;
  bool operator==(const NetworkData&) const = default;
};

/// Immutable, validated transmission network. Safe to share across threads.
class Network {
 public:
  /// Validates every type invariant; throws ValidationError naming the entity.
  explicit Network(NetworkData data);

  const std::vector<Bus>& buses() const { return data_.buses; }
  const std::vector<Line>& lines() const { return data_.lines; }
  const std::vector<Generator>& generators() const { return data_.generators; }
  const std::vector<Load>& loads() const { return data_.loads; }
  const std::vector<BatteryCandidate>& battery_candidates() const {
    return data_.battery_candidates;
  }
  const CostParameters& costs() const { return data_.costs; }
  const BatteryPhysics& battery_physics() const { return data_.battery_physics; }
  const NetworkData& data() const { return data_; }
  double base_mva() const { return kSystemBaseMva; }

  int n_buses() const { return static_cast<int>(data_.buses.size()); }
  int n_lines() const { return static_cast<int>(data_.lines.size()); }
  int n_generators() const { return static_cast<int>(data_.generators.size()); }

  /// Index into battery_candidates() for a bus, or -1.
  int candidate_index(int bus) const;

  bool operator==(const Network& other) const { return data_ == other.data_; }

 private:
  NetworkData data_;
  std::vector<int> candidate_of_bus_;
};

/// Investment vector X. Battery entries align with
/// Network::battery_candidates(); `underground` aligns with RiskyLineSet::lines.
struct InvestmentDecision {
  std::vector<double> batt_energy;
  std::vector<double> batt_power;
  std::vector<double> batt_placed;
  std::vector<double> underground;

  static InvestmentDecision zero(std::size_t n_candidates, std::size_t n_risky);
  bool operator==(const InvestmentDecision&) const = default;
};

struct CapitalCost {
  double battery = 0.0;      // $
  double underground = 0.0;  // $
};

/// Loads and validates a network document. MW-denominated files declare
/// their base through `base_mva` and are rescaled to the 100 MVA system base.
Network load_network(const std::filesystem::path& path);
Network parse_network(const nlohmann::json& doc, const std::string& source = "<memory>");

/// Serializes on the system base (`base_mva` = 100).
nlohmann::json network_to_json(const Network& net);

/// Throws ValidationError listing generators with a nonzero lower bound.
void validate_complete_recourse(const Network& net);

/// Undiscounted capital cost of a decision. `risky_lines` gives the line id of
/// each entry in decision.underground.
CapitalCost capital_cost(const Network& net, const std::vector<int>& risky_lines,
                         const InvestmentDecision& decision);

/// Daily amortized capital cost times the number of scenario days.
double amortized_investment_cost(const CostParameters& cost, const CapitalCost& capital,
                                 int n_scenario_days);
double amortized_investment_cost(const Network& net, const std::vector<int>& risky_lines,
                                 const InvestmentDecision& decision, int n_scenario_days);

/// Converts between MW-style quantities on `file_base` and system p.u.
inline double to_system_pu(double value, double file_base) {
  return value * (file_base / kSystemBaseMva);
}
inline double from_system_pu(double value, double file_base) {
  return value * (kSystemBaseMva / file_base);
}

}  // namespace gridplan
