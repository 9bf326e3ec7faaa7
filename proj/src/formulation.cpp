#include "gridplan/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "gridplan/errors.hpp"

namespace gridplan {

namespace {

using lp::Relation;
using lp::Term;

double step_hours(const BatteryPhysics& p) { return p.dt_seconds / 3600.0; }

// Objective coefficient of one p.u. of power held for one step at `price` $/MWh.
double energy_price(double price, const BatteryPhysics& p) {
  return price * kSystemBaseMva * step_hours(p) / kDollarsPerObjectiveUnit;
}

std::string col_name(const VarKey& k) {
  std::string s = to_string(k.kind);
  if (k.scenario >= 0) s += "_s" + std::to_string(k.scenario);
  if (k.entity >= 0) s += "_e" + std::to_string(k.entity);
  if (k.t >= 0) s += "_t" + std::to_string(k.t);
  return s;
}

std::string row_name(const RowKey& k) {
  std::string s = to_string(k.kind);
  if (k.scenario >= 0) s += "_s" + std::to_string(k.scenario);
  if (k.entity >= 0) s += "_e" + std::to_string(k.entity);
  if (k.t >= 0) s += "_t" + std::to_string(k.t);
  return s;
}

struct InvestmentColumns {
  std::vector<int> energy;  // per candidate
  std::vector<int> power;   // per candidate; the energy column when tied
  std::vector<int> placed;
  std::vector<int> underground;  // per risky-set position
  std::vector<int> flat;         // aligned with InvestmentLayout
};

void check_physics(const Network& net, int n_steps) {
  if (net.battery_candidates().empty()) return;
  const auto& p = net.battery_physics();
  if (p.initial_soe_fraction < p.alpha - 1e-12 || p.initial_soe_fraction > 1.0 - p.alpha + 1e-12) {
    throw FormulationError("initial state of energy lies outside [alpha, 1 - alpha]");
  }
  if (p.enforce_terminal_soe &&
      std::pow(p.gamma, n_steps) * p.initial_soe_fraction < p.alpha - 1e-12) {
    throw FormulationError("terminal state-of-energy floor gamma^T * initial is below alpha");
  }
}

class Builder {
 public:
  Builder(const Network& net, const RiskyLineSet& risky)
      : net_(net), risky_(risky), layout_(net, risky) {}

  const InvestmentLayout& layout() const { return layout_; }

  int column(const VarKey& key, double lo, double hi, double cost) {
    const int j = map_.add_column(key);
    lp_.add_variable(lo, hi, cost, col_name(key));
    return j;
  }

  int row(const RowKey& key, std::vector<Term> terms, Relation rel, double rhs, bool linking = false) {
    const int i = map_.add_row(key, linking);
    lp_.add_row(std::move(terms), rel, rhs, row_name(key));
    return i;
  }

  // First-stage columns. `free_copies` gives the continuous unbounded copies
  // used by the subproblem; otherwise the columns carry their real bounds.
  InvestmentColumns add_investment(Scheme scheme, int n_days, bool free_copies) {
    InvestmentColumns xc;
    const auto& cands = net_.battery_candidates();
    const auto nc = cands.size();
    xc.energy.assign(nc, -1);
    xc.power.assign(nc, -1);
    xc.placed.assign(nc, -1);
    xc.underground.assign(risky_.size(), -1);
    const auto cost = free_copies ? std::vector<double>(layout_.size(), 0.0) : layout_.costs(n_days);
    for (std::size_t k = 0; k < layout_.size(); ++k) {
      const auto& e = layout_[k];
      const auto i = static_cast<std::size_t>(e.entity);
      double lo = 0.0, hi = 1.0;
      switch (e.kind) {
        case VarKind::BattEnergy:
          hi = cands[i].e_max;
          if (cands[i].tie_power_to_energy) hi = std::min(hi, cands[i].p_max);
          break;
        case VarKind::BattPower: hi = cands[i].p_max; break;
        case VarKind::Underground:
          if (scheme == Scheme::BatteryOnly) hi = 0.0;
          break;
        default: break;
      }
      if (free_copies) {
        lo = -lp::kInf;
        hi = lp::kInf;
      }
      const int j = column(VarKey{e.kind, -1, e.entity, -1}, lo, hi, cost[k]);
      xc.flat.push_back(j);
      switch (e.kind) {
        case VarKind::BattEnergy:
          xc.energy[i] = j;
          if (cands[i].tie_power_to_energy) xc.power[i] = j;
          break;
        case VarKind::BattPower: xc.power[i] = j; break;
        case VarKind::BattPlaced: xc.placed[i] = j; break;
        default: xc.underground[i] = j; break;
      }
    }
    return xc;
  }

  // Capacity limits tied to the placement binary.
  void add_investment_rows(const InvestmentColumns& xc) {
    const auto& cands = net_.battery_candidates();
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const auto& bc = cands[c];
      const int ci = static_cast<int>(c);
      double e_hi = bc.e_max, e_lo = bc.e_min;
      if (bc.tie_power_to_energy) {
        e_hi = std::min(e_hi, bc.p_max);
        e_lo = std::max(e_lo, bc.p_min);
      }
      row(RowKey{RowKind::EnergyCap, -1, ci, -1}, {{xc.energy[c], 1.0}, {xc.placed[c], -e_hi}},
          Relation::LessEqual, 0.0);
      if (e_lo > 0.0) {
        row(RowKey{RowKind::EnergyMin, -1, ci, -1}, {{xc.energy[c], 1.0}, {xc.placed[c], -e_lo}},
            Relation::GreaterEqual, 0.0);
      }
      if (!bc.tie_power_to_energy) {
        row(RowKey{RowKind::EnergyCap, -1, ci, 1}, {{xc.power[c], 1.0}, {xc.placed[c], -bc.p_max}},
            Relation::LessEqual, 0.0);
        if (bc.p_min > 0.0) {
          row(RowKey{RowKind::PowerMin, -1, ci, -1}, {{xc.power[c], 1.0}, {xc.placed[c], -bc.p_min}},
              Relation::GreaterEqual, 0.0);
        }
      }
    }
  }

  void add_operations(const Scenario& s, const InvestmentColumns& xc, const FormulationOptions& opts);

  lp::LinearProgram take_lp() { return std::move(lp_); }
  VariableIndexMap take_map() {
    map_.set_risky_lines(risky_.lines);
    return std::move(map_);
  }

 private:
  const Network& net_;
  const RiskyLineSet& risky_;
  InvestmentLayout layout_;
  lp::LinearProgram lp_;
  VariableIndexMap map_;
};

void Builder::add_operations(const Scenario& s, const InvestmentColumns& xc,
                             const FormulationOptions& opts) {
  validate_scenario(s, net_);
  check_physics(net_, s.n_steps);
  const int T = s.n_steps;
  const int w = s.id;
  const auto& phys = net_.battery_physics();
  const auto& cost = net_.costs();
  const double h = step_hours(phys);
  const int nb = net_.n_buses();
  const auto& lines = net_.lines();
  const auto& gens = net_.generators();
  const auto& cands = net_.battery_candidates();
  const int nc = static_cast<int>(cands.size());

  std::vector<bool> pinned(static_cast<std::size_t>(nb), false);
  for (int b : reference_buses(net_, s, risky_)) pinned[static_cast<std::size_t>(b)] = true;

  // Column indices per (entity, t); -1 when the variable does not exist.
  std::vector<std::vector<int>> theta(nb, std::vector<int>(T, -1));
  std::vector<std::vector<int>> shed(nb, std::vector<int>(T, -1));
  std::vector<std::vector<int>> gen(gens.size(), std::vector<int>(T, -1));
  std::vector<std::vector<int>> flow(lines.size(), std::vector<int>(T, -1));
  std::vector<std::vector<int>> ch(nc, std::vector<int>(T, -1));
  std::vector<std::vector<int>> dch(nc, std::vector<int>(T, -1));
  std::vector<std::vector<int>> soe(nc, std::vector<int>(T + 1, -1));

  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < nb; ++b) {
      const bool pin = pinned[static_cast<std::size_t>(b)];
      theta[b][t] = column(VarKey{VarKind::Angle, w, b, t}, pin ? 0.0 : -lp::kInf,
                           pin ? 0.0 : lp::kInf, 0.0);
    }
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const double cap = s.gen_caps(static_cast<Eigen::Index>(g), t);
      gen[g][t] = column(VarKey{VarKind::Gen, w, static_cast<int>(g), t}, std::min(gens[g].p_min, cap),
                         cap, energy_price(s.gen_cost(static_cast<Eigen::Index>(g), t), phys));
    }
    for (int b = 0; b < nb; ++b) {
      const double d = s.demand(b, t);
      if (d > 0.0) {
        shed[b][t] = column(VarKey{VarKind::Shed, w, b, t}, 0.0, d,
                            energy_price(s.shed_cost[static_cast<std::size_t>(t)], phys));
      }
    }
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const int li = static_cast<int>(l);
      if (s.is_energized(li) || risky_.contains(li)) {
        const double fmax = lines[l].flow_limit;
        flow[l][t] = column(VarKey{VarKind::Flow, w, li, t}, -fmax, fmax, 0.0);
      }
    }
    for (int c = 0; c < nc; ++c) {
      const double lam = energy_price(cost.lambda_op, phys);
      ch[c][t] = column(VarKey{VarKind::Charge, w, c, t}, 0.0, lp::kInf, lam);
      dch[c][t] = column(VarKey{VarKind::Discharge, w, c, t}, 0.0, lp::kInf, lam);
    }
  }
  for (int c = 0; c < nc; ++c) {
    for (int t = 0; t <= T; ++t) soe[c][t] = column(VarKey{VarKind::Soe, w, c, t}, 0.0, lp::kInf, 0.0);
  }

  // Battery rows.
  for (int c = 0; c < nc; ++c) {
    const int e = xc.energy[static_cast<std::size_t>(c)];
    const int p = xc.power[static_cast<std::size_t>(c)];
    row(RowKey{RowKind::SoeInit, w, c, 0}, {{soe[c][0], 1.0}, {e, -phys.initial_soe_fraction}},
        Relation::Equal, 0.0);
    for (int t = 0; t <= T; ++t) {
      row(RowKey{RowKind::SoeMin, w, c, t}, {{soe[c][t], 1.0}, {e, -phys.alpha}}, Relation::GreaterEqual,
          0.0);
      row(RowKey{RowKind::SoeMax, w, c, t}, {{soe[c][t], 1.0}, {e, -(1.0 - phys.alpha)}},
          Relation::LessEqual, 0.0);
    }
    for (int t = 0; t < T; ++t) {
      row(RowKey{RowKind::SoeDynamics, w, c, t},
          {{soe[c][t + 1], 1.0}, {soe[c][t], -phys.gamma}, {ch[c][t], -phys.eta * h},
           {dch[c][t], h / phys.eta}},
          Relation::Equal, 0.0);
      row(RowKey{RowKind::ChargeCap, w, c, t}, {{ch[c][t], 1.0}, {p, -1.0}}, Relation::LessEqual, 0.0);
      row(RowKey{RowKind::DischargeCap, w, c, t}, {{dch[c][t], 1.0}, {p, -1.0}}, Relation::LessEqual, 0.0);
      row(RowKey{RowKind::ChargeDischargeCap, w, c, t}, {{ch[c][t], 1.0}, {dch[c][t], 1.0}, {p, -1.0}},
          Relation::LessEqual, 0.0);
    }
    if (phys.enforce_terminal_soe) {
      // Self-discharge makes "back to the initial level" unreachable for a
      // battery that cannot recharge, so the floor decays with gamma.
      row(RowKey{RowKind::SoeTerminal, w, c, T},
          {{soe[c][T], 1.0}, {e, -std::pow(phys.gamma, T) * phys.initial_soe_fraction}},
          Relation::GreaterEqual, 0.0);
    }
  }

  // Line rows.
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& ln = lines[l];
    const int li = static_cast<int>(l);
    const int i = ln.from_bus, j = ln.to_bus;
    const double b = ln.susceptance_b;
    if (s.is_energized(li)) {
      for (int t = 0; t < T; ++t) {
        row(RowKey{RowKind::FlowDef, w, li, t}, {{flow[l][t], 1.0}, {theta[i][t], b}, {theta[j][t], -b}},
            Relation::Equal, 0.0);
        row(RowKey{RowKind::AngleDiffMax, w, li, t}, {{theta[i][t], 1.0}, {theta[j][t], -1.0}},
            Relation::LessEqual, ln.angle_max);
        row(RowKey{RowKind::AngleDiffMin, w, li, t}, {{theta[i][t], 1.0}, {theta[j][t], -1.0}},
            Relation::GreaterEqual, ln.angle_min);
      }
    } else if (risky_.contains(li)) {
      const int ug = xc.underground[static_cast<std::size_t>(risky_.index_of(li))];
      const double m = ln.angle_max - ln.angle_min + 2.0 * opts.theta_span;
      const double bm = std::abs(b) * m;
      for (int t = 0; t < T; ++t) {
        const int f = flow[l][t], ti = theta[i][t], tj = theta[j][t];
        row(RowKey{RowKind::UgFlowMin, w, li, t}, {{f, 1.0}, {ug, ln.flow_limit}}, Relation::GreaterEqual,
            0.0);
        row(RowKey{RowKind::UgFlowMax, w, li, t}, {{f, 1.0}, {ug, -ln.flow_limit}}, Relation::LessEqual,
            0.0);
        row(RowKey{RowKind::UgAngleMax, w, li, t}, {{ti, 1.0}, {tj, -1.0}, {ug, m}}, Relation::LessEqual,
            ln.angle_max + m);
        row(RowKey{RowKind::UgAngleMin, w, li, t}, {{ti, 1.0}, {tj, -1.0}, {ug, -m}},
            Relation::GreaterEqual, ln.angle_min - m);
        row(RowKey{RowKind::UgFlowDefMax, w, li, t}, {{f, 1.0}, {ti, b}, {tj, -b}, {ug, bm}},
            Relation::LessEqual, bm);
        row(RowKey{RowKind::UgFlowDefMin, w, li, t}, {{f, 1.0}, {ti, b}, {tj, -b}, {ug, -bm}},
            Relation::GreaterEqual, -bm);
      }
    }
  }

  // Power balance: outflow - generation - discharge + charge - shed = -demand.
  std::vector<std::vector<int>> out_lines(nb), in_lines(nb), bus_gens(nb);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    out_lines[lines[l].from_bus].push_back(static_cast<int>(l));
    in_lines[lines[l].to_bus].push_back(static_cast<int>(l));
  }
  for (std::size_t g = 0; g < gens.size(); ++g) bus_gens[gens[g].bus].push_back(static_cast<int>(g));
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < nb; ++b) {
      std::vector<Term> terms;
      for (int l : out_lines[b]) {
        if (flow[l][t] >= 0) terms.push_back({flow[l][t], 1.0});
      }
      for (int l : in_lines[b]) {
        if (flow[l][t] >= 0) terms.push_back({flow[l][t], -1.0});
      }
      for (int g : bus_gens[b]) terms.push_back({gen[g][t], -1.0});
      const int c = net_.candidate_index(b);
      if (c >= 0) {
        terms.push_back({ch[c][t], 1.0});
        terms.push_back({dch[c][t], -1.0});
      }
      if (shed[b][t] >= 0) terms.push_back({shed[b][t], -1.0});
      row(RowKey{RowKind::Balance, w, b, t}, std::move(terms), Relation::Equal, -s.demand(b, t));
    }
  }
}

double get(const std::vector<double>& x, const VariableIndexMap& map, const VarKey& key) {
  const auto c = map.column(key);
  if (!c) return 0.0;
  return x.at(static_cast<std::size_t>(*c));
}

// Largest max-min angle difference over islands formed by energized and
// undergrounded lines.
double max_island_spread(const Network& net, const Scenario& scenario, const std::vector<double>& x,
                         const VariableIndexMap& map, const Eigen::MatrixXd& angle) {
  const int nb = net.n_buses();
  std::vector<int> parent(static_cast<std::size_t>(nb));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> closed(static_cast<std::size_t>(net.n_lines()), false);
  for (int l = 0; l < net.n_lines(); ++l) closed[l] = scenario.is_energized(l);
  const auto& risky = map.risky_lines();
  for (std::size_t r = 0; r < risky.size(); ++r) {
    if (get(x, map, VarKey{VarKind::Underground, -1, static_cast<int>(r), -1}) > 0.5) closed[risky[r]] = true;
  }
  for (const auto& ln : net.lines()) {
    if (!closed[ln.id]) continue;
    const int a = find(ln.from_bus), b = find(ln.to_bus);
    if (a != b) parent[a] = b;
  }
  double worst = 0.0;
  for (Eigen::Index t = 0; t < angle.cols(); ++t) {
    std::vector<double> lo(static_cast<std::size_t>(nb), lp::kInf), hi(static_cast<std::size_t>(nb), -lp::kInf);
    for (int b = 0; b < nb; ++b) {
      const int r = find(b);
      lo[r] = std::min(lo[r], angle(b, t));
      hi[r] = std::max(hi[r], angle(b, t));
    }
    for (int b = 0; b < nb; ++b) {
      if (hi[b] >= lo[b]) worst = std::max(worst, hi[b] - lo[b]);
    }
  }
  return worst;
}

}  // namespace

std::vector<int> reference_buses(const Network& net, const Scenario& scenario,
                                 const RiskyLineSet& risky) {
  const int nb = net.n_buses();
  std::vector<int> parent(static_cast<std::size_t>(nb));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& ln : net.lines()) {
    if (scenario.is_energized(ln.id) || risky.contains(ln.id)) {
      const int a = find(ln.from_bus), b = find(ln.to_bus);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  // Root is the lowest bus id of its component; prefer a designated reference.
  std::vector<int> chosen(static_cast<std::size_t>(nb), -1);
  for (const auto& bus : net.buses()) {
    const int r = find(bus.id);
    if (chosen[r] < 0 || (bus.is_reference && !net.buses()[chosen[r]].is_reference)) chosen[r] = bus.id;
  }
  std::vector<int> out;
  for (int v : chosen) {
    if (v >= 0) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BuiltMip build_monolithic(const Network& net, const std::vector<Scenario>& scenarios,
                          const RiskyLineSet& risky, Scheme scheme, const FormulationOptions& opts) {
  if (scenarios.empty()) throw FormulationError("at least one scenario is required");
  Builder b(net, risky);
  const auto xc = b.add_investment(scheme, static_cast<int>(scenarios.size()), false);
  b.add_investment_rows(xc);
  for (const auto& s : scenarios) b.add_operations(s, xc, opts);
  BuiltMip out;
  for (std::size_t k = 0; k < b.layout().size(); ++k) {
    if (b.layout().is_binary(k)) out.mip.binary_vars.push_back(xc.flat[k]);
  }
  out.mip.lp = b.take_lp();
  out.map = b.take_map();
  return out;
}

BuiltLp build_subproblem(const Network& net, const Scenario& scenario, const RiskyLineSet& risky,
                         const InvestmentDecision& x_hat, const FormulationOptions& opts) {
  Builder b(net, risky);
  const auto flat = b.layout().flatten(x_hat);
  const auto xc = b.add_investment(Scheme::BatteryPlusUnderground, 1, true);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    b.row(RowKey{RowKind::Linking, -1, static_cast<int>(k), -1}, {{xc.flat[k], 1.0}}, Relation::Equal,
          flat[k], true);
  }
  b.add_operations(scenario, xc, opts);
  BuiltLp out;
  out.lp = b.take_lp();
  out.map = b.take_map();
  return out;
}

void set_linking_rhs(BuiltLp& sub, const std::vector<double>& x_hat_flat) {
  const auto rows = sub.map.linking_rows();
  if (rows.size() != x_hat_flat.size()) {
    throw FormulationError("linking vector has " + std::to_string(x_hat_flat.size()) +
                           " entries, subproblem expects " + std::to_string(rows.size()));
  }
  for (int r : rows) {
    const auto k = static_cast<std::size_t>(sub.map.row_key(r).entity);
    sub.lp.rows[static_cast<std::size_t>(r)].rhs = x_hat_flat[k];
  }
}

BuiltMip build_master(const Network& net, const RiskyLineSet& risky, int n_scenarios,
                      const std::vector<CutData>& cuts, Scheme scheme) {
  if (n_scenarios < 1) throw FormulationError("at least one scenario is required");
  Builder b(net, risky);
  const auto xc = b.add_investment(scheme, n_scenarios, false);
  b.add_investment_rows(xc);
  std::vector<int> z(static_cast<std::size_t>(n_scenarios));
  for (int w = 0; w < n_scenarios; ++w) {
    z[static_cast<std::size_t>(w)] = b.column(VarKey{VarKind::ScenarioCost, w, -1, -1}, 0.0, lp::kInf, 1.0);
  }
  const std::size_t nx = b.layout().size();
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const auto& cut = cuts[k];
    if (cut.scenario_id < 0 || cut.scenario_id >= n_scenarios) {
      throw FormulationError("cut references unknown scenario " + std::to_string(cut.scenario_id));
    }
    if (cut.duals.size() != nx) {
      throw FormulationError("cut has " + std::to_string(cut.duals.size()) + " duals, expected " +
                             std::to_string(nx));
    }
    const auto anchor = b.layout().flatten(cut.x_anchor);
    // Z_w - nu.X >= v - nu.X_hat
    std::vector<Term> terms{{z[static_cast<std::size_t>(cut.scenario_id)], 1.0}};
    double rhs = cut.value;
    for (std::size_t j = 0; j < nx; ++j) {
      if (cut.duals[j] == 0.0) continue;
      terms.push_back({xc.flat[j], -cut.duals[j]});
      rhs -= cut.duals[j] * anchor[j];
    }
    b.row(RowKey{RowKind::Cut, cut.scenario_id, static_cast<int>(k), cut.iteration}, std::move(terms),
          Relation::GreaterEqual, rhs);
  }
  BuiltMip out;
  for (std::size_t k = 0; k < nx; ++k) {
    if (b.layout().is_binary(k)) out.mip.binary_vars.push_back(xc.flat[k]);
  }
  out.mip.lp = b.take_lp();
  out.map = b.take_map();
  return out;
}

double soe_update(double soe, double charge, double discharge, const BatteryPhysics& physics) {
  const double h = step_hours(physics);
  return physics.gamma * soe + physics.eta * charge * h - discharge * h / physics.eta;
}

OperationalCost operational_cost(const Network& net, const Scenario& scenario,
                                 const OperationalSchedule& schedule) {
  const auto& phys = net.battery_physics();
  OperationalCost c;
  for (int t = 0; t < scenario.n_steps; ++t) {
    const double shed_price = energy_price(scenario.shed_cost[static_cast<std::size_t>(t)], phys);
    for (int b = 0; b < net.n_buses(); ++b) c.load_shedding += shed_price * schedule.shed(b, t);
    for (int g = 0; g < net.n_generators(); ++g) {
      c.generation += energy_price(scenario.gen_cost(g, t), phys) * schedule.gen(g, t);
    }
    const double lam = energy_price(net.costs().lambda_op, phys);
    for (Eigen::Index k = 0; k < schedule.charge.rows(); ++k) {
      c.battery_operation += lam * (schedule.charge(k, t) + schedule.discharge(k, t));
    }
  }
  return c;
}

OperationalSchedule extract_schedule(const lp::LpSolution& solution, const VariableIndexMap& map,
                                     const Network& net, const Scenario& scenario,
                                     const FormulationOptions& opts) {
  if (solution.status != lp::LpStatus::Optimal) {
    throw ExtractionError("cannot extract a schedule from a non-optimal solution");
  }
  return extract_schedule(solution.x, map, net, scenario, opts);
}

OperationalSchedule extract_schedule(const std::vector<double>& x, const VariableIndexMap& map,
                                     const Network& net, const Scenario& scenario,
                                     const FormulationOptions& opts) {
  if (static_cast<int>(x.size()) != map.n_columns()) {
    throw ExtractionError("solution length does not match the variable map");
  }
  const int T = scenario.n_steps;
  const int w = scenario.id;
  const int nb = net.n_buses();
  const int ng = net.n_generators();
  const int nl = net.n_lines();
  const int nc = static_cast<int>(net.battery_candidates().size());
  OperationalSchedule s;
  s.scenario = w;
  s.n_steps = T;
  s.shed = Eigen::MatrixXd::Zero(nb, T);
  s.gen = Eigen::MatrixXd::Zero(ng, T);
  s.charge = Eigen::MatrixXd::Zero(nc, T);
  s.discharge = Eigen::MatrixXd::Zero(nc, T);
  s.soe = Eigen::MatrixXd::Zero(nc, T + 1);
  s.flow = Eigen::MatrixXd::Zero(nl, T);
  s.angle = Eigen::MatrixXd::Zero(nb, T);
  s.has_flow.assign(static_cast<std::size_t>(nl), false);
  if (!map.column(VarKey{VarKind::Angle, w, 0, 0})) {
    throw ExtractionError("variable map has no columns for scenario " + std::to_string(w));
  }
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < nb; ++b) {
      s.shed(b, t) = get(x, map, {VarKind::Shed, w, b, t});
      s.angle(b, t) = get(x, map, {VarKind::Angle, w, b, t});
    }
    for (int g = 0; g < ng; ++g) s.gen(g, t) = get(x, map, {VarKind::Gen, w, g, t});
    for (int l = 0; l < nl; ++l) {
      const auto c = map.column({VarKind::Flow, w, l, t});
      if (c) {
        s.flow(l, t) = x[static_cast<std::size_t>(*c)];
        s.has_flow[static_cast<std::size_t>(l)] = true;
      }
    }
    for (int c = 0; c < nc; ++c) {
      s.charge(c, t) = get(x, map, {VarKind::Charge, w, c, t});
      s.discharge(c, t) = get(x, map, {VarKind::Discharge, w, c, t});
    }
  }
  for (int c = 0; c < nc; ++c) {
    for (int t = 0; t <= T; ++t) s.soe(c, t) = get(x, map, {VarKind::Soe, w, c, t});
  }
  // Big-M is valid while every electrically connected island fits in
  // [-theta_span, theta_span] after a shift.
  const double spread = max_island_spread(net, scenario, x, map, s.angle);
  if (spread > 2.0 * opts.theta_span) {
    spdlog::warn("scenario {}: angle spread {:.4f} rad inside an island exceeds 2 * theta_span = {:.4f}; "
                 "big-M may cut off feasible flows",
                 w, spread, 2.0 * opts.theta_span);
  }
  s.cost = operational_cost(net, scenario, s);
  return s;
}

InvestmentDecision extract_decision(const std::vector<double>& x, const VariableIndexMap& map,
                                    const Network& net, const RiskyLineSet& risky) {
  const InvestmentLayout layout(net, risky);
  std::vector<double> flat;
  flat.reserve(layout.size());
  for (const auto& e : layout.entries()) {
    const int c = map.column_at(VarKey{e.kind, -1, e.entity, -1});
    double v = x.at(static_cast<std::size_t>(c));
    if (e.kind == VarKind::BattPlaced || e.kind == VarKind::Underground) v = std::round(v);
    v = std::max(0.0, v);
    flat.push_back(v);
  }
  return layout.unflatten(flat);
}

}  // namespace gridplan
