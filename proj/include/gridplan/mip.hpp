#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gridplan/simplex.hpp"

namespace gridplan::mip {

struct MixedIntegerProgram {
  lp::LinearProgram lp;
  std::vector<int> binary_vars;

  /// Throws std::invalid_argument if a binary column has bounds outside [0, 1].
  void validate() const;
};

enum class MipStatus : std::uint8_t { Optimal, Infeasible, GapLimit, NodeLimit };

struct MipOptions {
  double mip_gap = 1e-6;
  double int_tol = 1e-6;
  long node_limit = 1'000'000;
  double time_limit_s = 1e30;
  lp::SimplexOptions lp;
};

struct MipSolution {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> x;
  double objective = lp::kInf;
  double best_bound = -lp::kInf;
  double gap = lp::kInf;  // (objective - best_bound) / max(1, |objective|)
  long nodes_explored = 0;
  /// best_bound after each processed node; nondecreasing.
  std::vector<double> bound_history;
};

/// Best-bound branch and bound, branching on the most fractional binary
/// (lowest index on ties). Children are warm-started from the parent basis.
/// A time-limit stop with an incumbent reports GapLimit; a node-limit stop
/// reports NodeLimit.
MipSolution solve_mip(const MixedIntegerProgram& mip, const MipOptions& opts = {});

/// CPLEX LP text including a Binaries section.
void write_lp_format(const MixedIntegerProgram& mip, std::ostream& out);

}  // namespace gridplan::mip
