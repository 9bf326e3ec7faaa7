#include "gridplan/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gridplan/errors.hpp"

namespace gridplan {

namespace {

using nlohmann::json;

constexpr double kMwhPerPuHour = kSystemBaseMva;

const GeoPoint& coordinates_of(const Bus& bus) {
  if (!bus.coordinates) {
    throw MissingCoordinates("bus " + std::to_string(bus.id) + " has no coordinates");
  }
  return *bus.coordinates;
}

json position(const GeoPoint& p) { return json::array({p.lon, p.lat}); }

std::optional<double> max_line_risk(const Network& net, const std::vector<Scenario>& scenarios, int line) {
  std::optional<double> best;
  auto take = [&](double v) {
    if (!best || v > *best) best = v;
  };
  for (const auto& s : scenarios) {
    if (static_cast<std::size_t>(line) < s.line_risk.size()) take(s.line_risk[line]);
  }
  if (!best) {
    for (double v : net.lines()[static_cast<std::size_t>(line)].risk_series) take(v);
  }
  return best;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

json shed_json(const std::vector<ScenarioShed>& shed) {
  json arr = json::array();
  for (const auto& s : shed) {
    arr.push_back({{"scenario", s.scenario},
                   {"label", s.label},
                   {"shed_mwh", s.shed_mwh},
                   {"demand_mwh", s.demand_mwh},
                   {"percent", s.percent}});
  }
  return arr;
}

json costs_json(const CostBreakdown& c) {
  return {{"battery_capital_musd", c.battery_capital},
          {"underground_capital_musd", c.underground_capital},
          {"battery_daily_musd", c.battery_daily()},
          {"underground_daily_musd", c.underground_daily()},
          {"amortized_investment_musd", c.amortized_investment()},
          {"load_shedding_musd", c.load_shedding},
          {"generation_musd", c.generation},
          {"battery_operation_musd", c.battery_operation},
          {"n_scenario_days", c.n_scenario_days},
          {"objective_musd", c.objective()}};
}

}  // namespace

std::string format_musd(double value) {
  if (std::abs(value) < 0.005) value = 0.0;
  return fmt::format("{:.2f}", value);
}

double daily_investment(double capital, double lifetime_years) { return capital / (lifetime_years * 365.0); }

std::vector<ScenarioShed> shed_summary(const Network& net, const std::vector<Scenario>& scenarios,
                                       const std::vector<OperationalSchedule>& schedules) {
  if (schedules.size() != scenarios.size()) {
    throw DimensionMismatch("one schedule per scenario is required");
  }
  const double h = net.battery_physics().dt_seconds / 3600.0;
  std::vector<ScenarioShed> out;
  for (std::size_t w = 0; w < scenarios.size(); ++w) {
    ScenarioShed s;
    s.scenario = scenarios[w].id;
    s.label = scenarios[w].label;
    s.shed_mwh = schedules[w].shed.sum() * kMwhPerPuHour * h;
    s.demand_mwh = scenarios[w].demand.sum() * kMwhPerPuHour * h;
    s.percent = s.demand_mwh > 0.0 ? 100.0 * s.shed_mwh / s.demand_mwh : 0.0;
    out.push_back(s);
  }
  return out;
}

CostBreakdown cost_breakdown(const Network& net, const RiskyLineSet& risky,
                             const InvestmentDecision& decision,
                             const std::vector<OperationalSchedule>& schedules) {
  CostBreakdown c;
  const auto cap = capital_cost(net, risky.lines, decision);
  c.battery_capital = cap.battery / kDollarsPerObjectiveUnit;
  c.underground_capital = cap.underground / kDollarsPerObjectiveUnit;
  c.battery_lifetime_years = net.costs().battery_lifetime_years;
  c.underground_lifetime_years = net.costs().underground_lifetime_years;
  c.n_scenario_days = static_cast<int>(schedules.size());
  for (const auto& s : schedules) {
    c.load_shedding += s.cost.load_shedding;
    c.generation += s.cost.generation;
    c.battery_operation += s.cost.battery_operation;
  }
  return c;
}

void write_costs_csv(const CostBreakdown& c, std::ostream& out) {
  const double days = std::max(1, c.n_scenario_days);
  auto investment = [&](const char* name, double capital, double daily) {
    if (capital == 0.0) {
      out << name << ",n.a.,n.a.\n";
    } else {
      out << name << ',' << format_musd(capital) << ',' << format_musd(daily) << '\n';
    }
  };
  auto operation = [&](const char* name, double total) {
    out << name << ',' << format_musd(total) << ',' << format_musd(total / days) << '\n';
  };
  out << "component,total_musd,daily_musd\n";
  investment("battery_investment", c.battery_capital, c.battery_daily());
  investment("underground_investment", c.underground_capital, c.underground_daily());
  operation("load_shedding", c.load_shedding);
  operation("generation", c.generation);
  operation("battery_operation", c.battery_operation);
  operation("objective", c.objective());
}

json placement_geojson(const Network& net, const RiskyLineSet& risky, const InvestmentDecision& decision,
                       const std::vector<Scenario>& scenarios) {
  json features = json::array();
  const auto& cands = net.battery_candidates();
  for (std::size_t c = 0; c < cands.size() && c < decision.batt_energy.size(); ++c) {
    if (decision.batt_energy[c] <= 0.0) continue;
    const auto& bus = net.buses()[static_cast<std::size_t>(cands[c].bus)];
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", position(coordinates_of(bus))}}},
         {"properties",
          {{"bus", bus.id},
           {"name", bus.name},
           {"capacity_mwh", decision.batt_energy[c] * kMwhPerPuHour},
           {"power_mw", decision.batt_power[c] * kSystemBaseMva}}}});
  }
  for (const auto& ln : net.lines()) {
    const auto& a = coordinates_of(net.buses()[static_cast<std::size_t>(ln.from_bus)]);
    const auto& b = coordinates_of(net.buses()[static_cast<std::size_t>(ln.to_bus)]);
    const int r = risky.index_of(ln.id);
    const bool ug = r >= 0 && static_cast<std::size_t>(r) < decision.underground.size() &&
                    decision.underground[r] > 0.5;
    json props = {{"line", ln.id}, {"from_bus", ln.from_bus}, {"to_bus", ln.to_bus},
                  {"undergrounded", ug}, {"risky", r >= 0}};
    const auto risk = max_line_risk(net, scenarios, ln.id);
    props["max_risk"] = risk ? json(*risk) : json(nullptr);
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", {position(a), position(b)}}}},
                        {"properties", props}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

void emit_placement_map(const Network& net, const RiskyLineSet& risky, const InvestmentDecision& decision,
                        const std::vector<Scenario>& scenarios, const std::filesystem::path& path) {
  write_file(path, placement_geojson(net, risky, decision, scenarios).dump(2) + "\n");
}

void write_placement_svg(const Network& net, const RiskyLineSet& risky, const InvestmentDecision& decision,
                         std::ostream& out) {
  double lon0 = std::numeric_limits<double>::max(), lon1 = -lon0, lat0 = lon0, lat1 = -lon0;
  for (const auto& bus : net.buses()) {
    const auto& p = coordinates_of(bus);
    lon0 = std::min(lon0, p.lon);
    lon1 = std::max(lon1, p.lon);
    lat0 = std::min(lat0, p.lat);
    lat1 = std::max(lat1, p.lat);
  }
  const double size = 600.0, pad = 40.0;
  const double span = std::max({lon1 - lon0, lat1 - lat0, 1e-9});
  auto px = [&](const GeoPoint& p) { return pad + (p.lon - lon0) / span * size; };
  auto py = [&](const GeoPoint& p) { return pad + (lat1 - p.lat) / span * size; };

  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}">)", size + 2 * pad)
      << "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& ln : net.lines()) {
    const auto& a = coordinates_of(net.buses()[static_cast<std::size_t>(ln.from_bus)]);
    const auto& b = coordinates_of(net.buses()[static_cast<std::size_t>(ln.to_bus)]);
    const int r = risky.index_of(ln.id);
    const bool ug = r >= 0 && static_cast<std::size_t>(r) < decision.underground.size() &&
                    decision.underground[r] > 0.5;
    const char* color = ug ? "#1f5fbf" : (r >= 0 ? "#d98c00" : "#777777");
    out << fmt::format(
        R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="{}" stroke-width="{}"/>)",
        px(a), py(a), px(b), py(b), color, ug ? 4 : 1.5)
        << '\n';
  }
  for (const auto& bus : net.buses()) {
    const auto& p = coordinates_of(bus);
    out << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="2.5" fill="black"/>)", px(p), py(p)) << '\n';
  }
  const auto& cands = net.battery_candidates();
  for (std::size_t c = 0; c < cands.size() && c < decision.batt_energy.size(); ++c) {
    if (decision.batt_energy[c] <= 0.0) continue;
    const auto& p = coordinates_of(net.buses()[static_cast<std::size_t>(cands[c].bus)]);
    // area proportional to energy capacity
    const double radius = 4.0 + 8.0 * std::sqrt(decision.batt_energy[c]);
    out << fmt::format(
        R"(<circle cx="{:.1f}" cy="{:.1f}" r="{:.1f}" fill="red" fill-opacity="0.5" stroke="red"/>)", px(p),
        py(p), radius)
        << '\n';
  }
  out << "</svg>\n";
}

void emit_soe_traces(const Network& net, const InvestmentDecision& decision,
                     const std::vector<OperationalSchedule>& schedules, std::ostream& out) {
  const auto old_prec = out.precision(12);
  out << "scenario,bus,t_hour,soe_pu\n";
  const double h = net.battery_physics().dt_seconds / 3600.0;
  const auto& cands = net.battery_candidates();
  for (const auto& s : schedules) {
    for (std::size_t c = 0; c < cands.size() && c < decision.batt_energy.size(); ++c) {
      if (decision.batt_energy[c] <= 0.0) continue;
      for (int t = 0; t < s.n_steps; ++t) {
        out << s.scenario << ',' << cands[c].bus << ',' << t * h << ','
            << s.soe(static_cast<Eigen::Index>(c), t) << '\n';
      }
    }
  }
  out.precision(old_prec);
}

json report_to_json(const Network& net, const RunReport& r) {
  json batteries = json::array();
  const auto& cands = net.battery_candidates();
  for (std::size_t c = 0; c < cands.size() && c < r.decision.batt_energy.size(); ++c) {
    batteries.push_back({{"bus", cands[c].bus},
                         {"energy_pu", r.decision.batt_energy[c]},
                         {"power_pu", r.decision.batt_power[c]},
                         {"placed", r.decision.batt_placed[c] > 0.5}});
  }
  json underground = json::array();
  for (std::size_t k = 0; k < r.risky_lines.size() && k < r.decision.underground.size(); ++k) {
    underground.push_back({{"line", r.risky_lines[k]}, {"undergrounded", r.decision.underground[k] > 0.5}});
  }
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    iterations.push_back({{"k", it.k},
                          {"lower_bound", it.lower_bound},
                          {"upper_bound", it.upper_bound},
                          {"best_upper", it.best_upper},
                          {"gap", it.gap},
                          {"master_time_s", it.master_time_s},
                          {"subproblem_wall_s", it.subproblem_wall_s}});
  }
  json doc = {{"scheme", r.scheme},
              {"mode", r.mode},
              {"seed", r.seed},
              {"objective_musd", r.objective},
              {"decision", {{"batteries", batteries}, {"underground", underground}}},
              {"load_shed", shed_json(r.shed)},
              {"costs", costs_json(r.costs)},
              {"iterations", iterations},
              {"wall_time_s", r.wall_time_s}};
  if (r.termination) doc["termination"] = to_string(*r.termination);
  if (r.monolithic_objective) {
    doc["monolithic"] = {{"objective_musd", *r.monolithic_objective}, {"time_s", r.monolithic_time_s}};
    if (r.monolithic_nodes) doc["monolithic"]["nodes"] = *r.monolithic_nodes;
  }
  if (r.benders_objective) {
    doc["benders"] = {{"objective_musd", *r.benders_objective}, {"time_s", r.benders_time_s}};
  }
  if (r.relative_difference) doc["relative_difference"] = *r.relative_difference;
  if (r.baseline) {
    doc["baseline"] = {{"objective_musd", r.baseline->objective},
                       {"load_shed", shed_json(r.baseline->shed)},
                       {"costs", costs_json(r.baseline->costs)}};
  }
  return doc;
}

void write_report_files(const Network& net, const RiskyLineSet& risky, const std::vector<Scenario>& scenarios,
                        const RunReport& report, const std::filesystem::path& dir, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());

  write_file(dir / "report.json", report_to_json(net, report).dump(2) + "\n");
  {
    std::ostringstream os;
    write_iteration_csv(report.iterations, os);
    write_file(dir / "iterations.csv", os.str());
  }
  emit_placement_map(net, risky, report.decision, scenarios, dir / "placements.geojson");
  {
    std::ostringstream os;
    emit_soe_traces(net, report.decision, report.schedules, os);
    write_file(dir / "soe.csv", os.str());
  }
  {
    std::ostringstream os;
    write_costs_csv(report.costs, os);
    write_file(dir / "costs.csv", os.str());
  }
  if (svg) {
    std::ostringstream os;
    write_placement_svg(net, risky, report.decision, os);
    write_file(dir / "placements.svg", os.str());
  }
}

}  // namespace gridplan
