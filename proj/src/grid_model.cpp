#include "gridplan/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gridplan/errors.hpp"
#include "json_fields.hpp"

namespace gridplan {

double Generator::p_max_at(int t) const {
  if (p_max_series.empty()) return 0.0;
  if (p_max_series.size() == 1) return p_max_series.front();
  return p_max_series.at(static_cast<std::size_t>(t));
}

double Load::demand_at(int t) const {
  if (demand_series.empty()) return 0.0;
  if (demand_series.size() == 1) return demand_series.front();
  return demand_series.at(static_cast<std::size_t>(t));
}

InvestmentDecision InvestmentDecision::zero(std::size_t n_candidates, std::size_t n_risky) {
  InvestmentDecision d;
  d.batt_energy.assign(n_candidates, 0.0);
  d.batt_power.assign(n_candidates, 0.0);
  d.batt_placed.assign(n_candidates, 0.0);
  d.underground.assign(n_risky, 0.0);
  return d;
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

// Union-find over bus indices.
struct Components {
  std::vector<int> parent;
  explicit Components(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void check_dense_ids(std::vector<int> ids, const char* what) {
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) invalid(std::string("duplicate ") + what + " id " + std::to_string(ids[i]));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != static_cast<int>(i)) {
      invalid(std::string(what) + " ids must be dense 0..N-1; missing id " + std::to_string(i));
    }
  }
}

template <class T>
void sort_by_id(std::vector<T>& v) {
  std::sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

Network::Network(NetworkData data) : data_(std::move(data)) {
  auto collect_ids = [](const auto& items) {
    std::vector<int> ids;
    for (const auto& it : items) ids.push_back(it.id);
    return ids;
  };
  check_dense_ids(collect_ids(data_.buses), "bus");
  check_dense_ids(collect_ids(data_.lines), "line");
  check_dense_ids(collect_ids(data_.generators), "generator");
  check_dense_ids(collect_ids(data_.loads), "load");
  sort_by_id(data_.buses);
  sort_by_id(data_.lines);
  sort_by_id(data_.generators);
  sort_by_id(data_.loads);

  const int n = n_buses();
  auto bus_ok = [n](int b) { return b >= 0 && b < n; };

  for (const auto& l : data_.lines) {
    const std::string who = "line " + std::to_string(l.id);
    if (!bus_ok(l.from_bus) || !bus_ok(l.to_bus)) invalid(who + ": references unknown bus");
    if (l.from_bus == l.to_bus) invalid(who + ": from_bus equals to_bus");
    if (!(l.flow_limit > 0.0)) invalid(who + ": flow_limit must be > 0");
    if (!(l.angle_min < 0.0 && 0.0 < l.angle_max)) invalid(who + ": requires angle_min < 0 < angle_max");
    if (!finite_nonneg(l.length_miles)) invalid(who + ": length_miles must be >= 0");
    if (l.susceptance_b == 0.0 || !std::isfinite(l.susceptance_b)) invalid(who + ": susceptance_b must be nonzero");
    for (double r : l.risk_series) {
      if (!std::isfinite(r)) invalid(who + ": non-finite risk value");
    }
  }
  for (const auto& g : data_.generators) {
    const std::string who = "generator " + std::to_string(g.id);
    if (!bus_ok(g.bus)) invalid(who + ": references unknown bus");
    if (g.p_max_series.empty()) invalid(who + ": p_max_series is empty");
    if (!finite_nonneg(g.p_min)) invalid(who + ": p_min must be >= 0");
    for (double p : g.p_max_series) {
      if (!std::isfinite(p) || p < g.p_min) invalid(who + ": p_max_series below p_min");
    }
    if (!finite_nonneg(g.cost_coeff)) invalid(who + ": cost_coeff must be >= 0");
  }
  for (const auto& d : data_.loads) {
    const std::string who = "load " + std::to_string(d.id);
    if (!bus_ok(d.bus)) invalid(who + ": references unknown bus");
    for (double p : d.demand_series) {
      if (!finite_nonneg(p)) invalid(who + ": demand_series must be >= 0");
    }
  }

  candidate_of_bus_.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < data_.battery_candidates.size(); ++i) {
    const auto& c = data_.battery_candidates[i];
    const std::string who = "battery candidate at bus " + std::to_string(c.bus);
    if (!bus_ok(c.bus)) invalid(who + ": unknown bus");
    if (candidate_of_bus_[c.bus] != -1) invalid(who + ": duplicate candidate");
    if (!(finite_nonneg(c.e_min) && c.e_min <= c.e_max && std::isfinite(c.e_max))) {
      invalid(who + ": requires 0 <= e_min <= e_max");
    }
    if (!(finite_nonneg(c.p_min) && c.p_min <= c.p_max && std::isfinite(c.p_max))) {
      invalid(who + ": requires 0 <= p_min <= p_max");
    }
    candidate_of_bus_[c.bus] = static_cast<int>(i);
  }

  const auto& k = data_.costs;
  for (auto [name, v] : {std::pair{"c_energy", k.c_energy}, {"c_power", k.c_power},
                         {"c_fixed", k.c_fixed}, {"c_underground", k.c_underground},
                         {"c_loadshed", k.c_loadshed}, {"lambda_op", k.lambda_op}}) {
    if (!finite_nonneg(v)) invalid(std::string("costs.") + name + " must be >= 0");
  }
  if (!(k.battery_lifetime_years > 0.0) || !(k.underground_lifetime_years > 0.0)) {
    invalid("costs: lifetimes must be > 0");
  }
  if (!(k.lambda_op < k.c_loadshed)) invalid("costs.lambda_op must be < c_loadshed");
  for (const auto& g : data_.generators) {
    if (!(k.lambda_op < g.cost_coeff)) {
      invalid("costs.lambda_op must be < cost_coeff of generator " + std::to_string(g.id));
    }
  }

  const auto& ph = data_.battery_physics;
  if (!(ph.eta > 0.0 && ph.eta <= 1.0)) invalid("battery_physics.eta must be in (0, 1]");
  if (!(ph.gamma > 0.0 && ph.gamma <= 1.0)) invalid("battery_physics.gamma must be in (0, 1]");
  if (!(ph.alpha >= 0.0 && ph.alpha < 0.5)) invalid("battery_physics.alpha must be in [0, 0.5)");
  if (!(ph.dt_seconds > 0.0)) invalid("battery_physics.dt_seconds must be > 0");
  if (!(ph.initial_soe_fraction >= ph.alpha && ph.initial_soe_fraction <= 1.0 - ph.alpha)) {
    invalid("battery_physics.initial_soe_fraction must lie in [alpha, 1 - alpha]");
  }

  // Exactly one reference bus per connected component of the full line graph.
  Components comp(n);
  for (const auto& l : data_.lines) comp.unite(l.from_bus, l.to_bus);
  std::map<int, std::vector<int>> refs;
  for (const auto& b : data_.buses) {
    refs[comp.find(b.id)];
    if (b.is_reference) refs[comp.find(b.id)].push_back(b.id);
  }
  for (const auto& [root, list] : refs) {
    if (list.size() != 1) {
      std::ostringstream msg;
      msg << "component containing bus " << root << " has " << list.size()
          << " reference buses (exactly one required)";
      invalid(msg.str());
    }
  }
}

int Network::candidate_index(int bus) const {
  if (bus < 0 || bus >= n_buses()) return -1;
  return candidate_of_bus_[static_cast<std::size_t>(bus)];
}

// ---------------------------------------------------------------------------
// JSON ingestion

namespace {

std::vector<double> scaled(std::vector<double> v, double base) {
  for (double& x : v) x = to_system_pu(x, base);
  return v;
}

std::string item_path(const char* key, std::size_t i) {
  return std::string(key) + "[" + std::to_string(i) + "]";
}

}  // namespace

Network parse_network(const nlohmann::json& doc, const std::string& source) {
  using detail::ObjectReader;
  ObjectReader top(doc, source);
  NetworkData data;
  const double base = top.number("base_mva");
  if (!(base > 0.0)) throw ValidationError(source + ": base_mva must be > 0");

  const auto& buses = top.array("buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    ObjectReader r(buses[i], item_path("buses", i));
    Bus b;
    b.id = r.integer("id");
    b.name = r.string_or("name", "bus" + std::to_string(b.id));
    b.is_reference = r.boolean_or("is_reference", false);
    if (r.has("coordinates")) {
      const auto c = detail::as_series(r.raw("coordinates"), r.path_of("coordinates"));
      if (c.size() != 2) throw ParseError(r.path_of("coordinates") + ": expected [lat, lon]");
      b.coordinates = GeoPoint{c[0], c[1]};
    }
    r.finish();
    data.buses.push_back(std::move(b));
  }

  const auto& lines = top.array("lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ObjectReader r(lines[i], item_path("lines", i));
    Line l;
    l.id = r.integer("id");
    l.from_bus = r.integer("from_bus");
    l.to_bus = r.integer("to_bus");
    l.susceptance_b = to_system_pu(r.number("susceptance_b"), base);
    l.flow_limit = to_system_pu(r.number("flow_limit"), base);
    l.angle_min = r.number("angle_min");
    l.angle_max = r.number("angle_max");
    l.length_miles = r.number_or("length_miles", 0.0);
    if (r.has("risk_series")) l.risk_series = r.series("risk_series");
    r.finish();
    data.lines.push_back(std::move(l));
  }

  if (top.has("generators")) {
    const auto& gens = top.array("generators");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      ObjectReader r(gens[i], item_path("generators", i));
      Generator g;
      g.id = r.integer("id");
      g.bus = r.integer("bus");
      g.p_min = to_system_pu(r.number_or("p_min", 0.0), base);
      g.p_max_series = scaled(r.series("p_max_series"), base);
      g.cost_coeff = r.number("cost_coeff");
      r.finish();
      data.generators.push_back(std::move(g));
    }
  }

  if (top.has("loads")) {
    const auto& loads = top.array("loads");
    for (std::size_t i = 0; i < loads.size(); ++i) {
      ObjectReader r(loads[i], item_path("loads", i));
      Load d;
      d.id = r.integer("id");
      d.bus = r.integer("bus");
      d.demand_series = scaled(r.series("demand_series"), base);
      r.finish();
      data.loads.push_back(std::move(d));
    }
  }

  const BatteryCandidate defaults;
  if (top.has("battery_candidates")) {
    const auto& cands = top.array("battery_candidates");
    for (std::size_t i = 0; i < cands.size(); ++i) {
      ObjectReader r(cands[i], item_path("battery_candidates", i));
      BatteryCandidate c;
      c.bus = r.integer("bus");
      c.e_min = r.has("e_min") ? to_system_pu(r.number("e_min"), base) : defaults.e_min;
      c.e_max = r.has("e_max") ? to_system_pu(r.number("e_max"), base) : defaults.e_max;
      c.p_min = r.has("p_min") ? to_system_pu(r.number("p_min"), base) : defaults.p_min;
      c.p_max = r.has("p_max") ? to_system_pu(r.number("p_max"), base) : defaults.p_max;
      c.tie_power_to_energy = r.boolean_or("tie_power_to_energy", defaults.tie_power_to_energy);
      r.finish();
      data.battery_candidates.push_back(c);
    }
  } else {
    // every bus is a candidate unless the file restricts them
    std::vector<int> ids;
    for (const auto& b : data.buses) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids) {
      BatteryCandidate c = defaults;
      c.bus = id;
      data.battery_candidates.push_back(c);
    }
  }

  if (top.has("costs")) {
    ObjectReader r(top.object("costs"), source + ".costs");
    auto& k = data.costs;
    k.c_energy = r.number_or("c_energy", k.c_energy);
    k.c_power = r.number_or("c_power", k.c_power);
    k.c_fixed = r.number_or("c_fixed", k.c_fixed);
    k.c_underground = r.number_or("c_underground", k.c_underground);
    k.c_loadshed = r.number_or("c_loadshed", k.c_loadshed);
    k.lambda_op = r.number_or("lambda_op", k.lambda_op);
    k.battery_lifetime_years = r.number_or("battery_lifetime_years", k.battery_lifetime_years);
    k.underground_lifetime_years =
        r.number_or("underground_lifetime_years", k.underground_lifetime_years);
    r.finish();
  }

  if (top.has("battery_physics")) {
    ObjectReader r(top.object("battery_physics"), source + ".battery_physics");
    auto& p = data.battery_physics;
    p.eta = r.number_or("eta", p.eta);
    p.gamma = r.number_or("gamma", p.gamma);
    p.alpha = r.number_or("alpha", p.alpha);
    p.dt_seconds = r.number_or("dt_seconds", p.dt_seconds);
    p.initial_soe_fraction = r.number_or("initial_soe_fraction", p.initial_soe_fraction);
    p.enforce_terminal_soe = r.boolean_or("enforce_terminal_soe", p.enforce_terminal_soe);
    r.finish();
  }
  top.finish();

  Network net(std::move(data));
  validate_complete_recourse(net);
  return net;
}

Network load_network(const std::filesystem::path& path) {
  return parse_network(detail::read_json_file(path.string()), path.string());
}

nlohmann::json network_to_json(const Network& net) {
  using nlohmann::json;
  json doc;
  doc["base_mva"] = kSystemBaseMva;
  json buses = json::array();
  for (const auto& b : net.buses()) {
    json jb = {{"id", b.id}, {"name", b.name}, {"is_reference", b.is_reference}};
    if (b.coordinates) jb["coordinates"] = {b.coordinates->lat, b.coordinates->lon};
    buses.push_back(std::move(jb));
  }
  doc["buses"] = std::move(buses);
  json lines = json::array();
  for (const auto& l : net.lines()) {
    json jl = {{"id", l.id},
               {"from_bus", l.from_bus},
               {"to_bus", l.to_bus},
               {"susceptance_b", l.susceptance_b},
               {"flow_limit", l.flow_limit},
               {"angle_min", l.angle_min},
               {"angle_max", l.angle_max},
               {"length_miles", l.length_miles}};
    if (!l.risk_series.empty()) jl["risk_series"] = l.risk_series;
    lines.push_back(std::move(jl));
  }
  doc["lines"] = std::move(lines);
  json gens = json::array();
  for (const auto& g : net.generators()) {
    gens.push_back({{"id", g.id},
                    {"bus", g.bus},
                    {"p_min", g.p_min},
                    {"p_max_series", g.p_max_series},
                    {"cost_coeff", g.cost_coeff}});
  }
  doc["generators"] = std::move(gens);
  json loads = json::array();
  for (const auto& d : net.loads()) {
    loads.push_back({{"id", d.id}, {"bus", d.bus}, {"demand_series", d.demand_series}});
  }
  doc["loads"] = std::move(loads);
  json cands = json::array();
  for (const auto& c : net.battery_candidates()) {
    cands.push_back({{"bus", c.bus},
                     {"e_min", c.e_min},
                     {"e_max", c.e_max},
                     {"p_min", c.p_min},
                     {"p_max", c.p_max},
                     {"tie_power_to_energy", c.tie_power_to_energy}});
  }
  doc["battery_candidates"] = std::move(cands);
  const auto& k = net.costs();
  doc["costs"] = {{"c_energy", k.c_energy},
                  {"c_power", k.c_power},
                  {"c_fixed", k.c_fixed},
                  {"c_underground", k.c_underground},
                  {"c_loadshed", k.c_loadshed},
                  {"lambda_op", k.lambda_op},
                  {"battery_lifetime_years", k.battery_lifetime_years},
                  {"underground_lifetime_years", k.underground_lifetime_years}};
  const auto& p = net.battery_physics();
  doc["battery_physics"] = {{"eta", p.eta},
                            {"gamma", p.gamma},
                            {"alpha", p.alpha},
                            {"dt_seconds", p.dt_seconds},
                            {"initial_soe_fraction", p.initial_soe_fraction},
                            {"enforce_terminal_soe", p.enforce_terminal_soe}};
  return doc;
}

void validate_complete_recourse(const Network& net) {
  std::vector<int> offending;
  for (const auto& g : net.generators()) {
    if (g.p_min != 0.0) offending.push_back(g.id);
  }
  if (offending.empty()) return;
  std::ostringstream msg;
  msg << "complete recourse requires p_min = 0; offending generators:";
  for (int id : offending) msg << ' ' << id;
  throw ValidationError(msg.str());
}

CapitalCost capital_cost(const Network& net, const std::vector<int>& risky_lines,
                         const InvestmentDecision& decision) {
  const auto& k = net.costs();
  CapitalCost cap;
  const std::size_t nc = net.battery_candidates().size();
  for (std::size_t i = 0; i < nc && i < decision.batt_energy.size(); ++i) {
    const double power = i < decision.batt_power.size() ? decision.batt_power[i] : 0.0;
    const double placed = i < decision.batt_placed.size() ? decision.batt_placed[i] : 0.0;
    cap.battery += k.c_energy * decision.batt_energy[i] * kSystemBaseMva +
                   k.c_power * power * kSystemBaseMva + k.c_fixed * placed;
  }
  for (std::size_t j = 0; j < risky_lines.size() && j < decision.underground.size(); ++j) {
    const auto& line = net.lines().at(static_cast<std::size_t>(risky_lines[j]));
    cap.underground += k.c_underground * line.length_miles * decision.underground[j];
  }
  return cap;
}

double amortized_investment_cost(const CostParameters& cost, const CapitalCost& capital,
                                 int n_scenario_days) {
  const double daily = capital.battery / (cost.battery_lifetime_years * 365.0) +
                       capital.underground / (cost.underground_lifetime_years * 365.0);
  return daily * n_scenario_days;
}

double amortized_investment_cost(const Network& net, const std::vector<int>& risky_lines,
                                 const InvestmentDecision& decision, int n_scenario_days) {
  return amortized_investment_cost(net.costs(), capital_cost(net, risky_lines, decision),
                                   n_scenario_days);
}

}  // namespace gridplan
