#include "gridplan/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace gridplan::mip {

void MixedIntegerProgram::validate() const {
  lp.validate();
  for (int j : binary_vars) {
    if (j < 0 || j >= lp.n_vars) throw std::invalid_argument("binary index out of range");
    if (lp.lower[j] < 0.0 || lp.upper[j] > 1.0) {
      throw std::invalid_argument("binary column " + std::to_string(j) + " has bounds outside [0, 1]");
    }
  }
}

void write_lp_format(const MixedIntegerProgram& mip, std::ostream& out) {
  lp::write_lp_format(mip.lp, out, mip.binary_vars);
}

namespace {

struct Node {
  double bound = -lp::kInf;
  long seq = 0;
  std::vector<std::pair<int, double>> fixes;
  lp::Basis basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MixedIntegerProgram& mip, const MipOptions& opts)
      : mip_(mip), opts_(opts), work_(mip.lp) {}

  MipSolution solve() {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    MipSolution out;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{});
    long seq = 1;
    bool stopped_by_nodes = false;
    bool stopped_by_time = false;
    double best_bound = -lp::kInf;

    auto cutoff = [&] {
      if (!has_incumbent_) return lp::kInf;
      return incumbent_obj_ - opts_.mip_gap * std::max(1.0, std::abs(incumbent_obj_));
    };
    auto current_bound = [&] {
      double b = has_incumbent_ ? incumbent_obj_ : lp::kInf;
      if (!open.empty()) b = std::min(b, open.top().bound);
      return b;
    };

    while (!open.empty()) {
      if (open.top().bound >= cutoff()) break;  // best-first: every other node is worse
      if (out.nodes_explored >= opts_.node_limit) {
        stopped_by_nodes = true;
        break;
      }
      if (std::chrono::duration<double>(clock::now() - start).count() > opts_.time_limit_s) {
        stopped_by_time = true;
        break;
      }
      Node node = open.top();
      open.pop();
      ++out.nodes_explored;

      apply_fixes(node.fixes);
      const lp::LpSolution sol = node.basis.empty() ? lp::solve_lp(work_, opts_.lp)
                                                    : lp::solve_lp_warm(work_, node.basis, opts_.lp);
      if (sol.status == lp::LpStatus::Unbounded) {
        throw SolverError("branch and bound: LP relaxation is unbounded");
      }
      if (sol.status == lp::LpStatus::Optimal) {
        const double node_bound = std::max(sol.objective, node.bound);
        if (out.nodes_explored == 1) try_rounding(sol);
        if (node_bound < cutoff()) {
          const int branch = most_fractional(sol.x);
          if (branch < 0) {
            if (!has_incumbent_ || sol.objective < incumbent_obj_) {
              incumbent_obj_ = sol.objective;
              incumbent_x_ = sol.x;
              has_incumbent_ = true;
            }
          } else {
            for (double v : {0.0, 1.0}) {
              Node child;
              child.bound = node_bound;
              child.seq = seq++;
              child.fixes = node.fixes;
              child.fixes.emplace_back(branch, v);
              child.basis = sol.basis;
              open.push(std::move(child));
            }
          }
        }
      }
      best_bound = std::max(best_bound, current_bound());
      out.bound_history.push_back(best_bound);
    }

    if (!stopped_by_nodes && !stopped_by_time) {
      best_bound = std::max(best_bound, current_bound());
    }
    if (!has_incumbent_) {
      out.status = (stopped_by_nodes || stopped_by_time) ? MipStatus::NodeLimit : MipStatus::Infeasible;
      if (stopped_by_time) out.status = MipStatus::GapLimit;
      out.best_bound = best_bound;
      return out;
    }
    out.x = incumbent_x_;
    for (int j : mip_.binary_vars) out.x[j] = std::round(out.x[j]);
    out.objective = incumbent_obj_;
    out.best_bound = std::min(best_bound, incumbent_obj_);
    out.gap = std::max(0.0, (out.objective - out.best_bound) / std::max(1.0, std::abs(out.objective)));
    if (stopped_by_nodes && out.gap > opts_.mip_gap) {
      out.status = MipStatus::NodeLimit;
    } else if (stopped_by_time && out.gap > opts_.mip_gap) {
      out.status = MipStatus::GapLimit;
    } else {
      out.status = MipStatus::Optimal;
    }
    return out;
  }

 private:
  void apply_fixes(const std::vector<std::pair<int, double>>& fixes) {
    for (int j : mip_.binary_vars) {
      work_.lower[j] = mip_.lp.lower[j];
      work_.upper[j] = mip_.lp.upper[j];
    }
    for (const auto& [j, v] : fixes) {
      work_.lower[j] = v;
      work_.upper[j] = v;
    }
  }

  int most_fractional(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opts_.int_tol;
    for (int j : mip_.binary_vars) {
      const double frac = std::abs(x[j] - std::round(x[j]));
      if (frac > best_frac) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  // Root heuristic: fix every binary to its rounded relaxation value.
  void try_rounding(const lp::LpSolution& root) {
    if (most_fractional(root.x) < 0) return;
    std::vector<std::pair<int, double>> fixes;
    for (int j : mip_.binary_vars) {
      const double v = std::clamp(std::round(root.x[j]), mip_.lp.lower[j], mip_.lp.upper[j]);
      fixes.emplace_back(j, v);
    }
    apply_fixes(fixes);
    const auto sol = lp::solve_lp_warm(work_, root.basis, opts_.lp);
    if (sol.status == lp::LpStatus::Optimal &&
        (!has_incumbent_ || sol.objective < incumbent_obj_)) {
      incumbent_obj_ = sol.objective;
      incumbent_x_ = sol.x;
      has_incumbent_ = true;
    }
  }

  const MixedIntegerProgram& mip_;
  MipOptions opts_;
  lp::LinearProgram work_;
  bool has_incumbent_ = false;
  double incumbent_obj_ = lp::kInf;
  std::vector<double> incumbent_x_;
};

}  // namespace

MipSolution solve_mip(const MixedIntegerProgram& mip, const MipOptions& opts) {
  mip.validate();
  BranchAndBound bb(mip, opts);
  return bb.solve();
}

}  // namespace gridplan::mip
