#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gridplan::testing {

namespace {

struct Hyperplane {
  std::vector<double> a;
  double b;
};

bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

bool feasible(const lp::LinearProgram& lp, const std::vector<double>& x, double tol) {
  for (int j = 0; j < lp.n_vars; ++j) {
    if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
  }
  for (const auto& row : lp.rows) {
    double ax = 0.0;
    for (const auto& t : row.terms) ax += t.coef * x[t.col];
    const double scale = 1.0 + std::abs(row.rhs);
    switch (row.relation) {
      case lp::Relation::LessEqual:
        if (ax > row.rhs + tol * scale) return false;
        break;
      case lp::Relation::GreaterEqual:
        if (ax < row.rhs - tol * scale) return false;
        break;
      case lp::Relation::Equal:
        if (std::abs(ax - row.rhs) > tol * scale) return false;
        break;
    }
  }
  return true;
}

}  // namespace

std::optional<VertexOptimum> vertex_enumeration(const lp::LinearProgram& lp, double feas_tol) {
  const int n = lp.n_vars;
  std::vector<Hyperplane> planes;
  for (const auto& row : lp.rows) {
    Hyperplane h{std::vector<double>(static_cast<std::size_t>(n), 0.0), row.rhs};
    for (const auto& t : row.terms) h.a[t.col] += t.coef;
    planes.push_back(h);
  }
  for (int j = 0; j < n; ++j) {
    Hyperplane lo{std::vector<double>(static_cast<std::size_t>(n), 0.0), lp.lower[j]};
    lo.a[j] = 1.0;
    Hyperplane hi = lo;
    hi.b = lp.upper[j];
    planes.push_back(lo);
    planes.push_back(hi);
  }
  const int np = static_cast<int>(planes.size());
  const int n_rows = lp.n_rows();
  // both bounds of one variable are parallel unless the variable is fixed
  auto parallel_bounds = [&](const std::vector<int>& idx) {
    for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
      const int p = idx[a] - n_rows;
      if (p >= 0 && p % 2 == 0 && idx[a + 1] == idx[a] + 1) return true;
    }
    return false;
  };
  std::optional<VertexOptimum> best;
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[i] = i;
  do {
    if (parallel_bounds(idx)) continue;
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) A(r, c) = planes[idx[r]].a[c];
      b(r) = planes[idx[r]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd v = lu.solve(b);
    std::vector<double> x(v.data(), v.data() + n);
    if (!feasible(lp, x, feas_tol)) continue;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
    if (!best || obj < best->objective) best = VertexOptimum{obj, x};
  } while (next_combination(idx, np));
  return best;
}

lp::LinearProgram random_small_lp(std::mt19937_64& rng, int max_vars, int max_rows) {
  auto int_in = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  lp::LinearProgram lp;
  const int n = int_in(1, max_vars);
  const int m = int_in(1, max_rows);
  std::vector<double> x0;
  for (int j = 0; j < n; ++j) {
    const double lo = int_in(-5, 0);
    const double hi = int_in(0, 4) == 0 ? lo : lo + int_in(1, 8);
    lp.add_variable(lo, hi, int_in(-5, 5));
    x0.push_back(lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng));
  }
  const bool make_infeasible = int_in(0, 4) == 0;
  for (int i = 0; i < m; ++i) {
    std::vector<lp::Term> terms;
    double ax = 0.0, box_min = 0.0, box_max = 0.0;
    for (int j = 0; j < n; ++j) {
      const int c = int_in(-5, 5);
      if (c == 0) continue;
      terms.push_back({j, static_cast<double>(c)});
      ax += c * x0[j];
      box_min += std::min(c * lp.lower[j], c * lp.upper[j]);
      box_max += std::max(c * lp.lower[j], c * lp.upper[j]);
    }
    const auto rel = static_cast<lp::Relation>(int_in(0, 2));
    double rhs = std::round(ax);
    if (rel == lp::Relation::LessEqual) rhs = std::ceil(ax) + int_in(0, 3);
    if (rel == lp::Relation::GreaterEqual) rhs = std::floor(ax) - int_in(0, 3);
    if (rel == lp::Relation::Equal) rhs = ax;
    if (make_infeasible && i == 0 && !terms.empty()) {
      // unreachable over the box
      if (rel == lp::Relation::LessEqual) rhs = box_min - 1.0;
      else rhs = box_max + 1.0;
    }
    lp.add_row(std::move(terms), rel, rhs);
  }
  return lp;
}

std::optional<EnumerationOptimum> enumerate_binaries(const mip::MixedIntegerProgram& mip,
                                                     const lp::SimplexOptions& opts) {
  lp::LinearProgram work = mip.lp;
  const auto& bins = mip.binary_vars;
  const long count = 1L << bins.size();
  std::optional<EnumerationOptimum> best;
  int feasible_count = 0;
  lp::Basis basis;
  for (long mask = 0; mask < count; ++mask) {
    bool skip = false;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double v = (mask >> k) & 1L ? 1.0 : 0.0;
      const int j = bins[k];
      if (v < mip.lp.lower[j] || v > mip.lp.upper[j]) skip = true;
      work.lower[j] = v;
      work.upper[j] = v;
    }
    if (skip) continue;
    const auto sol = basis.empty() ? lp::solve_lp(work, opts) : lp::solve_lp_warm(work, basis, opts);
    if (sol.status != lp::LpStatus::Optimal) continue;
    basis = sol.basis;
    ++feasible_count;
    if (!best || sol.objective < best->objective) best = EnumerationOptimum{sol.objective, sol.x, 0};
  }
  if (best) best->feasible_assignments = feasible_count;
  return best;
}

PhysicsResiduals physics_residuals(const Network& net, const Scenario& s, const RiskyLineSet& risky,
                                   const InvestmentDecision& x, const OperationalSchedule& sch) {
  PhysicsResiduals r;
  const auto& phys = net.battery_physics();
  const auto& cands = net.battery_candidates();
  auto bump = [](double& slot, double v) { slot = std::max(slot, v); };
  for (int t = 0; t < s.n_steps; ++t) {
    for (int b = 0; b < net.n_buses(); ++b) {
      double injection = sch.shed(b, t) - s.demand(b, t);
      for (const auto& g : net.generators()) {
        if (g.bus == b) injection += sch.gen(g.id, t);
      }
      const int c = net.candidate_index(b);
      if (c >= 0) injection += sch.discharge(c, t) - sch.charge(c, t);
      double outflow = 0.0;
      for (const auto& ln : net.lines()) {
        if (ln.from_bus == b) outflow += sch.flow(ln.id, t);
        if (ln.to_bus == b) outflow -= sch.flow(ln.id, t);
      }
      bump(r.balance, std::abs(injection - outflow));
      bump(r.shed_bounds, std::max(-sch.shed(b, t), sch.shed(b, t) - s.demand(b, t)));
    }
    for (const auto& g : net.generators()) {
      bump(r.generation_bounds, std::max(-sch.gen(g.id, t), sch.gen(g.id, t) - s.gen_caps(g.id, t)));
    }
    for (const auto& ln : net.lines()) {
      const int k = risky.index_of(ln.id);
      const bool ug = k >= 0 && x.underground[static_cast<std::size_t>(k)] > 0.5;
      if (s.is_energized(ln.id) || ug) {
        const double law = sch.flow(ln.id, t) +
                           ln.susceptance_b * (sch.angle(ln.from_bus, t) - sch.angle(ln.to_bus, t));
        bump(r.flow_law, std::abs(law));
      } else {
        bump(r.dead_line_flow, std::abs(sch.flow(ln.id, t)));
      }
    }
  }
  for (std::size_t c = 0; c < cands.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double e = x.batt_energy[c], p = x.batt_power[c];
    bump(r.soe_initial, std::abs(sch.soe(ci, 0) - phys.initial_soe_fraction * e));
    for (int t = 0; t <= s.n_steps; ++t) {
      const double v = sch.soe(ci, t);
      bump(r.soe_bounds, std::max(phys.alpha * e - v, v - (1.0 - phys.alpha) * e));
    }
    for (int t = 0; t < s.n_steps; ++t) {
      const double ch = sch.charge(ci, t), dch = sch.discharge(ci, t);
      bump(r.soe_recursion, std::abs(sch.soe(ci, t + 1) - soe_update(sch.soe(ci, t), ch, dch, phys)));
      bump(r.simultaneous, std::min(ch, dch));
      bump(r.power_limit, std::max({ch - p, dch - p, ch + dch - p, -ch, -dch}));
    }
  }
  return r;
}

double investment_objective(const Network& net, const RiskyLineSet& risky, const InvestmentDecision& decision,
                            int n_days) {
  return amortized_investment_cost(net, risky.lines, decision, n_days) / kDollarsPerObjectiveUnit;
}

InvestmentDecision random_feasible_decision(const Network& net, const RiskyLineSet& risky, Scheme scheme,
                                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& cands = net.battery_candidates();
  auto d = InvestmentDecision::zero(cands.size(), risky.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (u(rng) < 0.4) continue;
    const auto& bc = cands[c];
    double e_lo = bc.e_min, e_hi = bc.e_max;
    if (bc.tie_power_to_energy) {
      e_lo = std::max(e_lo, bc.p_min);
      e_hi = std::min(e_hi, bc.p_max);
    }
    d.batt_placed[c] = 1.0;
    d.batt_energy[c] = e_lo + (e_hi - e_lo) * u(rng);
    d.batt_power[c] = bc.tie_power_to_energy ? d.batt_energy[c] : bc.p_min + (bc.p_max - bc.p_min) * u(rng);
  }
  if (scheme == Scheme::BatteryPlusUnderground) {
    for (auto& v : d.underground) v = u(rng) < 0.5 ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace gridplan::testing
