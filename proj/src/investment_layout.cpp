#include <algorithm>
#include <string>

#include "gridplan/errors.hpp"
#include "gridplan/formulation.hpp"

namespace gridplan {

std::string to_string(VarKind k) {
  switch (k) {
    case VarKind::BattEnergy: return "batt_energy";
    case VarKind::BattPower: return "batt_power";
    case VarKind::BattPlaced: return "batt_placed";
    case VarKind::Underground: return "underground";
    case VarKind::ScenarioCost: return "z";
    case VarKind::Shed: return "shed";
    case VarKind::Gen: return "gen";
    case VarKind::Charge: return "charge";
    case VarKind::Discharge: return "discharge";
    case VarKind::Soe: return "soe";
    case VarKind::Flow: return "flow";
    case VarKind::Angle: return "angle";
  }
  return "unknown";
}

std::string to_string(RowKind k) {
  switch (k) {
    case RowKind::EnergyCap: return "energy_cap";
    case RowKind::EnergyMin: return "energy_min";
    case RowKind::PowerMin: return "power_min";
    case RowKind::SoeInit: return "soe_init";
    case RowKind::SoeDynamics: return "soe_dyn";
    case RowKind::SoeTerminal: return "soe_end";
    case RowKind::SoeMin: return "soe_min";
    case RowKind::SoeMax: return "soe_max";
    case RowKind::ChargeCap: return "ch_cap";
    case RowKind::DischargeCap: return "dch_cap";
    case RowKind::ChargeDischargeCap: return "chdch_cap";
    case RowKind::FlowDef: return "flow_def";
    case RowKind::AngleDiffMax: return "dtheta_max";
    case RowKind::AngleDiffMin: return "dtheta_min";
    case RowKind::UgFlowMin: return "ug_flow_min";
    case RowKind::UgFlowMax: return "ug_flow_max";
    case RowKind::UgAngleMax: return "ug_dtheta_max";
    case RowKind::UgAngleMin: return "ug_dtheta_min";
    case RowKind::UgFlowDefMax: return "ug_def_max";
    case RowKind::UgFlowDefMin: return "ug_def_min";
    case RowKind::Balance: return "balance";
    case RowKind::Linking: return "link";
    case RowKind::Cut: return "cut";
  }
  return "unknown";
}

int VariableIndexMap::add_column(const VarKey& key) {
  const int idx = n_columns();
  if (!col_index_.emplace(key, idx).second) {
    throw FormulationError("duplicate column " + to_string(key.kind));
  }
  col_keys_.push_back(key);
  return idx;
}

int VariableIndexMap::add_row(const RowKey& key, bool linking) {
  const int idx = n_rows();
  if (!row_index_.emplace(key, idx).second) {
    throw FormulationError("duplicate row " + to_string(key.kind));
  }
  row_keys_.push_back(key);
  linking_.push_back(linking);
  return idx;
}

std::optional<int> VariableIndexMap::column(const VarKey& key) const {
  const auto it = col_index_.find(key);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> VariableIndexMap::row(const RowKey& key) const {
  const auto it = row_index_.find(key);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

int VariableIndexMap::column_at(const VarKey& key) const {
  const auto c = column(key);
  if (!c) {
    throw FormulationError("no column " + to_string(key.kind) + " for scenario " +
                           std::to_string(key.scenario) + ", entity " + std::to_string(key.entity) +
                           ", t " + std::to_string(key.t));
  }
  return *c;
}

std::vector<int> VariableIndexMap::linking_rows() const {
  std::vector<int> out;
  for (int i = 0; i < n_rows(); ++i) {
    if (linking_[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

InvestmentLayout::InvestmentLayout(const Network& net, const RiskyLineSet& risky)
    : net_(&net), risky_(&risky) {
  for (int line : risky.lines) {
    if (line < 0 || line >= net.n_lines()) {
      throw FormulationError("risky set references unknown line " + std::to_string(line));
    }
  }
  if (!std::is_sorted(risky.lines.begin(), risky.lines.end()) ||
      std::adjacent_find(risky.lines.begin(), risky.lines.end()) != risky.lines.end()) {
    throw FormulationError("risky set must be strictly ascending");
  }
  const auto& cands = net.battery_candidates();
  for (int c = 0; c < static_cast<int>(cands.size()); ++c) {
    entries_.push_back({VarKind::BattEnergy, c});
    if (!cands[c].tie_power_to_energy) entries_.push_back({VarKind::BattPower, c});
    entries_.push_back({VarKind::BattPlaced, c});
  }
  for (int r = 0; r < static_cast<int>(risky.size()); ++r) {
    entries_.push_back({VarKind::Underground, r});
  }
}

std::vector<double> InvestmentLayout::flatten(const InvestmentDecision& d) const {
  const std::size_t nc = net_->battery_candidates().size();
  if (d.batt_energy.size() != nc || d.batt_power.size() != nc || d.batt_placed.size() != nc ||
      d.underground.size() != risky_->size()) {
    throw FormulationError("investment decision does not match the candidate and risky sets");
  }
  std::vector<double> x;
  x.reserve(entries_.size());
  for (const auto& e : entries_) {
    const auto i = static_cast<std::size_t>(e.entity);
    switch (e.kind) {
      case VarKind::BattEnergy: x.push_back(d.batt_energy[i]); break;
      case VarKind::BattPower: x.push_back(d.batt_power[i]); break;
      case VarKind::BattPlaced: x.push_back(d.batt_placed[i]); break;
      default: x.push_back(d.underground[i]); break;
    }
  }
  return x;
}

InvestmentDecision InvestmentLayout::unflatten(const std::vector<double>& x) const {
  if (x.size() != entries_.size()) {
    throw FormulationError("investment vector has " + std::to_string(x.size()) +
                           " entries, expected " + std::to_string(entries_.size()));
  }
  const auto& cands = net_->battery_candidates();
  auto d = InvestmentDecision::zero(cands.size(), risky_->size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto i = static_cast<std::size_t>(entries_[k].entity);
    switch (entries_[k].kind) {
      case VarKind::BattEnergy:
        d.batt_energy[i] = x[k];
        if (cands[i].tie_power_to_energy) d.batt_power[i] = x[k];
        break;
      case VarKind::BattPower: d.batt_power[i] = x[k]; break;
      case VarKind::BattPlaced: d.batt_placed[i] = x[k]; break;
      default: d.underground[i] = x[k]; break;
    }
  }
  return d;
}

std::vector<double> InvestmentLayout::costs(int n_scenario_days) const {
  const auto& cost = net_->costs();
  const double base = net_->base_mva();
  const double batt_days = cost.battery_lifetime_years * 365.0;
  const double ug_days = cost.underground_lifetime_years * 365.0;
  const double scale = static_cast<double>(n_scenario_days) / kDollarsPerObjectiveUnit;
  const auto& cands = net_->battery_candidates();
  std::vector<double> c;
  c.reserve(entries_.size());
  for (const auto& e : entries_) {
    switch (e.kind) {
      case VarKind::BattEnergy: {
        double per_unit = cost.c_energy * base;
        if (cands[static_cast<std::size_t>(e.entity)].tie_power_to_energy) per_unit += cost.c_power * base;
        c.push_back(per_unit / batt_days * scale);
        break;
      }
      case VarKind::BattPower: c.push_back(cost.c_power * base / batt_days * scale); break;
      case VarKind::BattPlaced: c.push_back(cost.c_fixed / batt_days * scale); break;
      default: {
        const int line = risky_->lines[static_cast<std::size_t>(e.entity)];
        const double miles = net_->lines()[static_cast<std::size_t>(line)].length_miles;
        c.push_back(cost.c_underground * miles / ug_days * scale);
        break;
      }
    }
  }
  return c;
}

}  // namespace gridplan
