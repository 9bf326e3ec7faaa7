// Bounded-variable revised primal simplex.
//
// Every row i is rewritten as a_i x + s_i = b_i with a slack whose bounds
// encode the relation: [0, inf) for <=, (-inf, 0] for >=, [0, 0] for =.
// Phase 1 minimizes the sum of bound infeasibilities of the basic variables
// (no artificial columns), so cold and warm starts share one code path.
// The basis is held as a sparse LU of B0 plus a product-form eta file,
// refactorized every `refactor_interval` updates.

#include "gridplan/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

namespace gridplan::lp {

int LinearProgram::add_variable(double lo, double hi, double cost, std::string name) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  col_names.push_back(std::move(name));
  return n_vars++;
}

int LinearProgram::add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
  rows.push_back(Row{std::move(terms), rel, rhs, std::move(name)});
  return n_rows() - 1;
}

void LinearProgram::validate() const {
  const auto n = static_cast<std::size_t>(n_vars);
  if (objective.size() != n || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("LinearProgram: vector sizes differ from n_vars");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw std::invalid_argument("LinearProgram: bad bounds on column " + std::to_string(j));
    }
    if (lower[j] == kInf || upper[j] == -kInf) {
      throw std::invalid_argument("LinearProgram: empty bound range on column " + std::to_string(j));
    }
    if (!std::isfinite(objective[j])) {
      throw std::invalid_argument("LinearProgram: non-finite cost on column " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i].rhs)) {
      throw std::invalid_argument("LinearProgram: non-finite rhs on row " + std::to_string(i));
    }
    for (const auto& t : rows[i].terms) {
      if (t.col < 0 || t.col >= n_vars || !std::isfinite(t.coef)) {
        throw std::invalid_argument("LinearProgram: bad term in row " + std::to_string(i));
      }
    }
  }
}

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kDegenerateStep = 1e-12;
constexpr double kEtaDrop = 1e-14;
constexpr double kSmallPivot = 1e-7;

class Solver {
 public:
  Solver(const LinearProgram& lp, const SimplexOptions& opts) : opts_(opts) {
    n_ = lp.n_vars;
    m_ = lp.n_rows();
    ncols_ = n_ + m_;

    // Merge duplicate entries per (row, col) and build the structural CSC.
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m_; ++i) {
      for (const auto& t : lp.rows[static_cast<std::size_t>(i)].terms) {
        if (t.coef != 0.0) trips.emplace_back(i, t.col, t.coef);
      }
    }
    SpMat a(m_, n_);
    a.setFromTriplets(trips.begin(), trips.end());
    a.prune(0.0);
    a.makeCompressed();
    col_start_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n_ + 1);
    col_row_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    col_val_.assign(a.valuePtr(), a.valuePtr() + a.nonZeros());

    cost_.assign(static_cast<std::size_t>(ncols_), 0.0);
    lo_.resize(static_cast<std::size_t>(ncols_));
    hi_.resize(static_cast<std::size_t>(ncols_));
    for (int j = 0; j < n_; ++j) {
      cost_[j] = lp.objective[j];
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
    }
    rhs_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows[static_cast<std::size_t>(i)];
      rhs_[i] = row.rhs;
      const int s = n_ + i;
      switch (row.relation) {
        case Relation::LessEqual: lo_[s] = 0.0; hi_[s] = kInf; break;
        case Relation::GreaterEqual: lo_[s] = -kInf; hi_[s] = 0.0; break;
        case Relation::Equal: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
    }
    x_.assign(static_cast<std::size_t>(ncols_), 0.0);
    status_.assign(static_cast<std::size_t>(ncols_), ColStatus::AtLower);
    pos_.assign(static_cast<std::size_t>(ncols_), -1);
    head_.assign(static_cast<std::size_t>(m_), -1);
  }

  void cold_start() {
    for (int j = 0; j < n_; ++j) place_nonbasic(j, ColStatus::AtLower);
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      status_[n_ + i] = ColStatus::Basic;
    }
    if (!refactor()) throw NumericalFailure("simplex: slack basis failed to factorize");
    recompute_basics();
  }

  bool warm_start(const Basis& basis) {
    if (static_cast<int>(basis.basic.size()) != m_ ||
        static_cast<int>(basis.status.size()) != ncols_) {
      return false;
    }
    std::vector<int> seen(static_cast<std::size_t>(ncols_), 0);
    for (int c : basis.basic) {
      if (c < 0 || c >= ncols_ || seen[c]++ || basis.status[c] != ColStatus::Basic) return false;
    }
    const auto n_basic = std::count(basis.status.begin(), basis.status.end(), ColStatus::Basic);
    if (n_basic != m_) return false;

    std::fill(pos_.begin(), pos_.end(), -1);
    for (int i = 0; i < m_; ++i) {
      head_[i] = basis.basic[i];
      pos_[head_[i]] = i;
      status_[head_[i]] = ColStatus::Basic;
    }
    for (int j = 0; j < ncols_; ++j) {
      if (pos_[j] < 0) place_nonbasic(j, basis.status[j]);
    }
    if (!refactor()) return false;
    recompute_basics();
    return true;
  }

  LpSolution run() {
    int verify_rounds = 0;
    int recoveries = 0;
    long degenerate_run = 0;
    bool bland = false;
    Vec y(m_), alpha(m_);

    for (;;) {
      if (iterations_ >= opts_.max_iterations) {
        throw IterationLimit("simplex: iteration limit " + std::to_string(opts_.max_iterations) +
                             " reached");
      }
      if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
        if (!refactor()) {
          recover(recoveries);
          continue;
        }
        recompute_basics();
      }

      const bool phase1 = compute_basic_costs(y);
      btran(y);

      int dir = 0;
      const int q = price(y, phase1, bland, dir);

      if (q < 0) {
        // Confirm on a fresh factorization before declaring a result.
        if (!etas_.empty() || verify_rounds == 0) {
          ++verify_rounds;
          if (!refactor()) {
            recover(recoveries);
            continue;
          }
          recompute_basics();
          Vec y2(m_);
          const bool still_phase1 = compute_basic_costs(y2);
          btran(y2);
          int dir2 = 0;
          if (still_phase1 != phase1 || price(y2, still_phase1, bland, dir2) >= 0) {
            if (verify_rounds > 50) {
              throw NumericalFailure("simplex: optimality could not be confirmed");
            }
            continue;
          }
          y = y2;
        }
        if (phase1) return finish(LpStatus::Infeasible, y);
        return finish(LpStatus::Optimal, y);
      }

      column(q, alpha);
      ftran(alpha);

      // Ratio test. Harris two-pass unless Bland's rule is active.
      const double tol = opts_.feas_tol;
      double theta_max = kInf;
      auto limit_of = [&](int i, double& bound, bool relaxed) -> double {
        const double a = alpha[i];
        if (std::abs(a) <= opts_.pivot_tol) return kInf;
        const int col = head_[i];
        const double v = x_[col];
        const double rate = -dir * a;  // d x_col / d theta
        const double lo = lo_[col], hi = hi_[col];
        const double slack = relaxed ? tol : 0.0;
        if (rate < 0.0) {
          if (phase1 && v > hi + tol) {
            bound = hi;
            return (v - hi + slack) / -rate;
          }
          if (phase1 && v < lo - tol) return kInf;
          if (lo == -kInf) return kInf;
          bound = lo;
          return (v - lo + slack) / -rate;
        }
        if (phase1 && v < lo - tol) {
          bound = lo;
          return (lo - v + slack) / rate;
        }
        if (phase1 && v > hi + tol) return kInf;
        if (hi == kInf) return kInf;
        bound = hi;
        return (hi - v + slack) / rate;
      };

      int leave = -1;
      double leave_bound = 0.0;
      double theta = kInf;
      if (!bland) {
        for (int i = 0; i < m_; ++i) {
          double b = 0.0;
          theta_max = std::min(theta_max, limit_of(i, b, true));
        }
        double best_abs = 0.0;
        if (theta_max < kInf) {
          for (int i = 0; i < m_; ++i) {
            double b = 0.0;
            const double r = limit_of(i, b, false);
            if (r <= theta_max && std::abs(alpha[i]) > best_abs) {
              best_abs = std::abs(alpha[i]);
              leave = i;
              leave_bound = b;
              theta = r;
            }
          }
        }
      } else {
        for (int i = 0; i < m_; ++i) {
          double b = 0.0;
          const double r = limit_of(i, b, false);
          if (r == kInf) continue;
          if (r < theta || (r == theta && leave >= 0 && head_[i] < head_[leave])) {
            theta = r;
            leave = i;
            leave_bound = b;
          }
        }
      }

      const double range = hi_[q] - lo_[q];
      if (leave < 0 && range == kInf) {
        if (!phase1) return finish(LpStatus::Unbounded, y);
        // A phase-1 direction always meets a violated bound; this is numerical noise.
        if (!refactor()) {
          recover(recoveries);
          continue;
        }
        recompute_basics();
        if (++verify_rounds > 50) throw NumericalFailure("simplex: unbounded phase-1 ray");
        continue;
      }

      if (leave >= 0 && std::abs(alpha[leave]) < kSmallPivot && !etas_.empty()) {
        // Suspicious pivot on a stale factorization: refresh and redo.
        if (!refactor()) {
          recover(recoveries);
          continue;
        }
        recompute_basics();
        continue;
      }

      ++iterations_;
      if (leave < 0 || range <= theta) {
        // Bound flip: the entering variable crosses to its other bound.
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * range * alpha[i];
        if (dir > 0) {
          x_[q] = hi_[q];
          status_[q] = ColStatus::AtUpper;
        } else {
          x_[q] = lo_[q];
          status_[q] = ColStatus::AtLower;
        }
        degenerate_run = 0;
        bland = false;
        continue;
      }

      theta = std::max(theta, 0.0);
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * theta * alpha[i];
      x_[q] += dir * theta;

      const int out = head_[leave];
      x_[out] = leave_bound;
      pos_[out] = -1;
      if (lo_[out] == hi_[out] || leave_bound == lo_[out]) {
        status_[out] = ColStatus::AtLower;
      } else {
        status_[out] = ColStatus::AtUpper;
      }
      head_[leave] = q;
      pos_[q] = leave;
      status_[q] = ColStatus::Basic;
      push_eta(leave, alpha);

      if (theta <= kDegenerateStep) {
        if (++degenerate_run >= opts_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  long iterations() const { return iterations_; }

 private:
  struct Eta {
    int p = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;  // off-pivot nonzeros
  };

  // Puts column j at a bound consistent with `hint` (or the nearest valid one).
  void place_nonbasic(int j, ColStatus hint) {
    const double lo = lo_[j], hi = hi_[j];
    ColStatus st = hint;
    if (st == ColStatus::Basic) st = ColStatus::AtLower;
    if (st == ColStatus::AtLower && lo == -kInf) st = hi < kInf ? ColStatus::AtUpper : ColStatus::FreeZero;
    if (st == ColStatus::AtUpper && hi == kInf) st = lo > -kInf ? ColStatus::AtLower : ColStatus::FreeZero;
    if (st == ColStatus::FreeZero && (lo > -kInf || hi < kInf)) {
      st = lo > -kInf ? ColStatus::AtLower : ColStatus::AtUpper;
    }
    if (lo == hi) st = ColStatus::AtLower;
    status_[j] = st;
    x_[j] = st == ColStatus::AtLower ? lo : st == ColStatus::AtUpper ? hi : 0.0;
  }

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else {
      f(j - n_, 1.0);
    }
  }

  void column(int j, Vec& out) const {
    out.setZero();
    for_column(j, [&](int r, double v) { out[r] = v; });
  }

  double dot_column(int j, const Vec& y) const {
    if (j >= n_) return y[j - n_];
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += col_val_[k] * y[col_row_[k]];
    return s;
  }

  bool refactor() {
    etas_.clear();
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m_; ++i) {
      for_column(head_[i], [&](int r, double v) { trips.emplace_back(r, i, v); });
    }
    SpMat b(m_, m_);
    b.setFromTriplets(trips.begin(), trips.end());
    b.makeCompressed();
    if (m_ == 0) return true;
    lu_.analyzePattern(b);
    lu_.factorize(b);
    return lu_.info() == Eigen::Success;
  }

  // Drops to the slack basis, keeping structural values at their bounds.
  void recover(int& recoveries) {
    if (++recoveries > 3) throw NumericalFailure("simplex: basis singular beyond recovery");
    spdlog::debug("simplex: singular basis, restarting from slack basis");
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == ColStatus::Basic) {
        const double v = x_[j];
        ColStatus hint = ColStatus::AtLower;
        if (hi_[j] < kInf && (lo_[j] == -kInf || std::abs(hi_[j] - v) < std::abs(v - lo_[j]))) {
          hint = ColStatus::AtUpper;
        }
        place_nonbasic(j, hint);
      }
    }
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      status_[n_ + i] = ColStatus::Basic;
    }
    if (!refactor()) throw NumericalFailure("simplex: slack basis failed to factorize");
    recompute_basics();
  }

  void ftran(Vec& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v);
    for (const auto& e : etas_) {
      const double xp = v[e.p] / e.pivot;
      if (xp != 0.0) {
        for (const auto& [i, a] : e.entries) v[i] -= a * xp;
      }
      v[e.p] = xp;
    }
  }

  void btran(Vec& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->p];
      for (const auto& [i, a] : it->entries) s -= a * v[i];
      v[it->p] = s / it->pivot;
    }
    v = lu_.transpose().solve(v);
  }

  void push_eta(int p, const Vec& alpha) {
    Eta e;
    e.p = p;
    e.pivot = alpha[p];
    for (int i = 0; i < m_; ++i) {
      if (i != p && std::abs(alpha[i]) > kEtaDrop) e.entries.emplace_back(i, alpha[i]);
    }
    etas_.push_back(std::move(e));
  }

  void recompute_basics() {
    Vec r(m_);
    for (int i = 0; i < m_; ++i) r[i] = rhs_[i];
    for (int j = 0; j < ncols_; ++j) {
      if (status_[j] == ColStatus::Basic || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](int row, double v) { r[row] -= v * xj; });
    }
    ftran(r);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = r[i];
  }

  // Fills basic costs; returns true when some basic variable is infeasible
  // (phase 1 costs were used).
  bool compute_basic_costs(Vec& cb) const {
    const double tol = opts_.feas_tol;
    bool infeasible = false;
    for (int i = 0; i < m_; ++i) {
      const int c = head_[i];
      if (x_[c] < lo_[c] - tol) {
        cb[i] = -1.0;
        infeasible = true;
      } else if (x_[c] > hi_[c] + tol) {
        cb[i] = 1.0;
        infeasible = true;
      } else {
        cb[i] = 0.0;
      }
    }
    if (!infeasible) {
      for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
    }
    return infeasible;
  }

  int price(const Vec& y, bool phase1, bool bland, int& dir) const {
    const double tol = opts_.opt_tol;
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      const ColStatus st = status_[j];
      if (st == ColStatus::Basic || lo_[j] == hi_[j]) continue;
      const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
      int jdir = 0;
      if (st == ColStatus::AtLower) {
        if (d < -tol) jdir = 1;
      } else if (st == ColStatus::AtUpper) {
        if (d > tol) jdir = -1;
      } else if (std::abs(d) > tol) {
        jdir = d < 0.0 ? 1 : -1;
      }
      if (jdir == 0) continue;
      if (bland) {
        dir = jdir;
        return j;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        dir = jdir;
      }
    }
    return best;
  }

  LpSolution finish(LpStatus status, const Vec& y) const {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * sol.x[j];
    sol.basis.basic = head_;
    sol.basis.status = status_;
    if (status == LpStatus::Optimal) {
      sol.duals.assign(y.data(), y.data() + m_);
      sol.reduced_costs.resize(static_cast<std::size_t>(n_));
      for (int j = 0; j < n_; ++j) {
        sol.reduced_costs[j] = status_[j] == ColStatus::Basic ? 0.0 : cost_[j] - dot_column(j, y);
      }
    } else {
      sol.duals.assign(static_cast<std::size_t>(m_), 0.0);
      sol.reduced_costs.assign(static_cast<std::size_t>(n_), 0.0);
    }
    return sol;
  }

  SimplexOptions opts_;
  int n_ = 0, m_ = 0, ncols_ = 0;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> cost_, lo_, hi_, rhs_;

  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<ColStatus> status_;
  std::vector<double> x_;

  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.validate();
  Solver s(lp, opts);
  s.cold_start();
  return s.run();
}

LpSolution solve_lp_warm(const LinearProgram& lp, const Basis& basis, const SimplexOptions& opts) {
  lp.validate();
  Solver s(lp, opts);
  if (!s.warm_start(basis)) {
    Solver cold(lp, opts);
    cold.cold_start();
    return cold.run();
  }
  return s.run();
}

OptimalityReport check_optimality(const LinearProgram& lp, const LpSolution& sol) {
  OptimalityReport rep;
  const auto n = static_cast<std::size_t>(lp.n_vars);
  double c_x = 0.0;
  double d_x = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = sol.x[j];
    rep.max_bound_violation = std::max({rep.max_bound_violation, lp.lower[j] - v, v - lp.upper[j]});
    c_x += lp.objective[j] * v;
    const double d = sol.reduced_costs[j];
    d_x += d * v;
    const bool at_lo = lp.lower[j] > -kInf && v <= lp.lower[j];
    const bool at_hi = lp.upper[j] < kInf && v >= lp.upper[j];
    double infeas = 0.0;
    if (at_lo && at_hi) {
      infeas = 0.0;
    } else if (at_lo) {
      infeas = std::max(0.0, -d);
    } else if (at_hi) {
      infeas = std::max(0.0, d);
    } else {
      infeas = std::abs(d);
    }
    rep.max_dual_infeasibility = std::max(rep.max_dual_infeasibility, infeas);
  }
  double y_b = 0.0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const auto& row = lp.rows[i];
    double act = 0.0;
    for (const auto& t : row.terms) act += t.coef * sol.x[static_cast<std::size_t>(t.col)];
    const double slack = row.rhs - act;
    double viol = 0.0;
    const double y = sol.duals[i];
    switch (row.relation) {
      case Relation::LessEqual:
        viol = std::max(0.0, -slack);
        rep.max_dual_infeasibility = std::max(rep.max_dual_infeasibility, y);
        break;
      case Relation::GreaterEqual:
        viol = std::max(0.0, slack);
        rep.max_dual_infeasibility = std::max(rep.max_dual_infeasibility, -y);
        break;
      case Relation::Equal: viol = std::abs(slack); break;
    }
    rep.max_row_violation = std::max(rep.max_row_violation, viol);
    rep.max_complementarity = std::max(rep.max_complementarity, std::abs(y * slack));
    y_b += y * row.rhs;
  }
  rep.duality_gap = std::abs(c_x - y_b - d_x);
  return rep;
}

}  // namespace gridplan::lp
