#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "gridplan/errors.hpp"

namespace gridplan::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Term {
  int col = 0;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// min c'x  s.t.  rows,  lower <= x <= upper.
struct LinearProgram {
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> col_names;  // optional, used by the LP-format dump
  std::vector<Row> rows;

  int add_variable(double lo, double hi, double cost, std::string name = {});
  int add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});
  int n_rows() const { return static_cast<int>(rows.size()); }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

/// Position of a column relative to its bounds. Columns 0..n-1 are the
/// structural variables, n..n+m-1 the row slacks.
enum class ColStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

struct Basis {
  std::vector<int> basic;          // m column indices, one per row position
  std::vector<ColStatus> status;   // n + m entries
  bool empty() const { return basic.empty(); }
  bool operator==(const Basis&) const = default;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// One multiplier per row: d(objective)/d(rhs). For minimization a <= row
  /// has dual <= 0, a >= row dual >= 0, an = row is unrestricted.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  Basis basis;
  long iterations = 0;
  bool operator==(const LpSolution&) const = default;
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double duality_tol = 1e-8;
  double pivot_tol = 1e-9;
  long max_iterations = 5'000'000;
  int refactor_interval = 100;
  int bland_after = 1000;  // consecutive degenerate pivots before Bland's rule
};

class IterationLimit : public SolverError {
 public:
  using SolverError::SolverError;
};

class NumericalFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

/// Starts from `basis` when it is dimensionally compatible and nonsingular,
/// otherwise falls back to a cold start.
LpSolution solve_lp_warm(const LinearProgram& lp, const Basis& basis,
                         const SimplexOptions& opts = {});

/// Residuals used by the acceptance checks.
struct OptimalityReport {
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_dual_infeasibility = 0.0;
  double duality_gap = 0.0;             // |c'x - y'b - sum d_j x_j|
  double max_complementarity = 0.0;     // max |y_i * slack_i|
};
OptimalityReport check_optimality(const LinearProgram& lp, const LpSolution& sol);

/// Writes the problem in CPLEX LP text format. Columns in `binary_cols` are
/// listed in a Binaries section.
void write_lp_format(const LinearProgram& lp, std::ostream& out,
                     const std::vector<int>& binary_cols = {});

}  // namespace gridplan::lp
