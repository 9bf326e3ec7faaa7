#include "gridplan/scenario_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridplan/errors.hpp"
#include "json_fields.hpp"

namespace gridplan {

std::set<int> Scenario::energized_lines() const {
  std::set<int> out;
  for (std::size_t l = 0; l < energized.size(); ++l) {
    if (energized[l]) out.insert(static_cast<int>(l));
  }
  return out;
}

std::set<int> Scenario::deenergized_lines() const {
  std::set<int> out;
  for (std::size_t l = 0; l < energized.size(); ++l) {
    if (!energized[l]) out.insert(static_cast<int>(l));
  }
  return out;
}

bool RiskyLineSet::contains(int line) const { return index_of(line) >= 0; }

int RiskyLineSet::index_of(int line) const {
  auto it = std::lower_bound(lines.begin(), lines.end(), line);
  if (it == lines.end() || *it != line) return -1;
  return static_cast<int>(it - lines.begin());
}

std::set<int> apply_risk_threshold(const Network& net, const std::map<int, double>& risks,
                                   double threshold) {
  std::set<int> on;
  for (const auto& line : net.lines()) {
    auto it = risks.find(line.id);
    if (it == risks.end()) throw MissingRisk(line.id);
    if (it->second <= threshold) on.insert(line.id);
  }
  return on;
}

RiskyLineSet build_risky_set(const std::vector<Scenario>& scenarios, int n_lines) {
  std::set<int> risky;
  for (const auto& s : scenarios) {
    for (int l = 0; l < n_lines; ++l) {
      if (!s.is_energized(l)) risky.insert(l);
    }
  }
  return RiskyLineSet{std::vector<int>(risky.begin(), risky.end())};
}

Scenario default_scenario(const Network& net, int id, int n_steps) {
  Scenario s;
  s.id = id;
  s.label = "scenario-" + std::to_string(id);
  s.n_steps = n_steps;
  s.energized.assign(static_cast<std::size_t>(net.n_lines()), true);
  s.demand = Eigen::MatrixXd::Zero(net.n_buses(), n_steps);
  for (const auto& d : net.loads()) {
    for (int t = 0; t < n_steps; ++t) s.demand(d.bus, t) += d.demand_at(t);
  }
  s.gen_caps.resize(net.n_generators(), n_steps);
  s.gen_cost.resize(net.n_generators(), n_steps);
  for (const auto& g : net.generators()) {
    for (int t = 0; t < n_steps; ++t) {
      s.gen_caps(g.id, t) = g.p_max_at(t);
      s.gen_cost(g.id, t) = g.cost_coeff;
    }
  }
  s.shed_cost.assign(static_cast<std::size_t>(n_steps), net.costs().c_loadshed);
  return s;
}

void validate_scenario(const Scenario& s, const Network& net) {
  const std::string who = "scenario '" + s.label + "'";
  if (s.n_steps <= 0) throw DimensionMismatch(who + ": n_steps must be positive");
  if (s.energized.size() != static_cast<std::size_t>(net.n_lines())) {
    throw DimensionMismatch(who + ": energization vector does not match line count");
  }
  auto check_matrix = [&](const Eigen::MatrixXd& m, int rows, const char* name) {
    if (m.rows() != rows || m.cols() != s.n_steps) {
      throw DimensionMismatch(who + ": " + name + " is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                              "x" + std::to_string(s.n_steps));
    }
    if (!m.allFinite() || (m.array() < 0.0).any()) {
      throw ValidationError(who + ": " + name + " must be finite and >= 0");
    }
  };
  check_matrix(s.demand, net.n_buses(), "demand");
  check_matrix(s.gen_caps, net.n_generators(), "gen_caps");
  check_matrix(s.gen_cost, net.n_generators(), "gen_cost");
  if (s.shed_cost.size() != static_cast<std::size_t>(s.n_steps)) {
    throw DimensionMismatch(who + ": shed_cost length differs from n_steps");
  }
  for (double c : s.shed_cost) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError(who + ": shed_cost must be >= 0");
  }
  if (!s.line_risk.empty() && s.line_risk.size() != static_cast<std::size_t>(net.n_lines())) {
    throw DimensionMismatch(who + ": line_risk length differs from line count");
  }
}

namespace {

int parse_id(const std::string& key, const std::string& path) {
  try {
    std::size_t used = 0;
    int id = std::stoi(key, &used);
    if (used == key.size()) return id;
  } catch (const std::exception&) {
  }
  throw ParseError(path + ": key '" + key + "' is not an integer id");
}

std::vector<double> fit_series(const std::vector<double>& v, int n_steps, const std::string& path) {
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(n_steps), v.front());
  if (v.size() != static_cast<std::size_t>(n_steps)) {
    throw DimensionMismatch(path + ": has " + std::to_string(v.size()) + " entries, expected " +
                            std::to_string(n_steps));
  }
  return v;
}

// Fills rows of `target` from either a full row-major 2-D array or an object
// keyed by entity id.
void read_entity_matrix(const nlohmann::json& value, const std::string& path, const char* entity,
                        double scale, Eigen::MatrixXd& target) {
  const int rows = static_cast<int>(target.rows());
  const int n_steps = static_cast<int>(target.cols());
  auto set_row = [&](int r, const std::vector<double>& series, const std::string& row_path) {
    auto fitted = fit_series(series, n_steps, row_path);
    for (int t = 0; t < n_steps; ++t) target(r, t) = fitted[static_cast<std::size_t>(t)] * scale;
  };
  if (value.is_object()) {
    for (auto it = value.begin(); it != value.end(); ++it) {
      const int id = parse_id(it.key(), path);
      if (id < 0 || id >= rows) {
        throw UnknownEntity(path + ": unknown " + entity + " " + std::to_string(id));
      }
      set_row(id, detail::as_series(it.value(), path + "." + it.key()), path + "." + it.key());
    }
    return;
  }
  const auto m = detail::as_matrix(value, path);
  if (static_cast<int>(m.size()) != rows) {
    throw DimensionMismatch(path + ": has " + std::to_string(m.size()) + " rows, expected " +
                            std::to_string(rows) + " (one per " + entity + ")");
  }
  for (int r = 0; r < rows; ++r) {
    set_row(r, m[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
  }
}

}  // namespace

std::vector<Scenario> parse_scenarios(const nlohmann::json& doc, const Network& net,
                                      const std::string& source) {
  detail::ObjectReader top(doc, source);
  const double base = top.number_or("base_mva", kSystemBaseMva);
  if (!(base > 0.0)) throw ValidationError(source + ": base_mva must be > 0");
  const double scale = base / kSystemBaseMva;
  const int default_steps = top.has("n_steps") ? top.integer("n_steps") : 24;
  const auto& list = top.array("scenarios");
  top.finish();
  if (list.empty()) throw ValidationError(source + ": at least one scenario is required");

  std::vector<Scenario> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = source + ".scenarios[" + std::to_string(i) + "]";
    detail::ObjectReader r(list[i], path);
    const int n_steps = r.has("n_steps") ? r.integer("n_steps") : default_steps;
    if (n_steps <= 0) throw DimensionMismatch(path + ".n_steps: must be positive");
    Scenario s = default_scenario(net, static_cast<int>(i), n_steps);
    s.label = r.string_or("label", s.label);

    const int n_lines = net.n_lines();
    if (r.has("line_status") && (r.has("line_risk") || r.has("threshold"))) {
      throw ParseError(path + ": give either line_status or line_risk/threshold, not both");
    }
    if (r.has("line_status")) {
      const auto& off = r.array("line_status");
      for (const auto& v : off) {
        if (!v.is_number_integer()) throw ParseError(path + ".line_status: expected line ids");
        const int id = v.get<int>();
        if (id < 0 || id >= n_lines) {
          throw UnknownEntity(path + ".line_status: unknown line " + std::to_string(id));
        }
        s.energized[static_cast<std::size_t>(id)] = false;
      }
    } else if (r.has("threshold")) {
      const double threshold = r.number("threshold");
      std::map<int, double> risks;
      if (r.has("line_risk")) {
        const auto& obj = r.object("line_risk");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
          const int id = parse_id(it.key(), path + ".line_risk");
          if (id < 0 || id >= n_lines) {
            throw UnknownEntity(path + ".line_risk: unknown line " + std::to_string(id));
          }
          risks[id] = detail::as_number(it.value(), path + ".line_risk." + it.key());
        }
      } else {
        for (const auto& line : net.lines()) {
          if (i < line.risk_series.size()) risks[line.id] = line.risk_series[i];
        }
      }
      const auto on = apply_risk_threshold(net, risks, threshold);
      for (int l = 0; l < n_lines; ++l) s.energized[static_cast<std::size_t>(l)] = on.count(l) > 0;
      s.line_risk.assign(static_cast<std::size_t>(n_lines), 0.0);
      for (const auto& [id, v] : risks) s.line_risk[static_cast<std::size_t>(id)] = v;
    } else if (r.has("line_risk")) {
      throw ParseError(path + ": line_risk requires a threshold");
    }
    if (s.line_risk.empty()) {
      bool all = n_lines > 0;
      for (const auto& line : net.lines()) all = all && i < line.risk_series.size();
      if (all) {
        for (const auto& line : net.lines()) s.line_risk.push_back(line.risk_series[i]);
      }
    }

    if (r.has("demand")) read_entity_matrix(r.raw("demand"), path + ".demand", "bus", scale, s.demand);
    if (r.has("gen_caps")) {
      read_entity_matrix(r.raw("gen_caps"), path + ".gen_caps", "generator", scale, s.gen_caps);
    }
    if (r.has("shed_cost")) {
      s.shed_cost = fit_series(r.series("shed_cost"), n_steps, path + ".shed_cost");
    }
    if (r.has("gen_cost")) {
      const auto& gc = r.raw("gen_cost");
      if (gc.is_array() && !gc.empty() && gc[0].is_number()) {
        // one constant cost per generator
        const auto per_gen = detail::as_series(gc, path + ".gen_cost");
        if (static_cast<int>(per_gen.size()) != net.n_generators()) {
          throw DimensionMismatch(path + ".gen_cost: expected one entry per generator");
        }
        for (int g = 0; g < net.n_generators(); ++g) {
          s.gen_cost.row(g).setConstant(per_gen[static_cast<std::size_t>(g)]);
        }
      } else {
        read_entity_matrix(gc, path + ".gen_cost", "generator", 1.0, s.gen_cost);
      }
    }
    r.finish();
    validate_scenario(s, net);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path, const Network& net) {
  return parse_scenarios(detail::read_json_file(path.string()), net, path.string());
}

}  // namespace gridplan
