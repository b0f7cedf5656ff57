#pragma once

#include <iosfwd>
#include <limits>

#include <Eigen/Dense>

namespace cinv {

/// minimize c'z  s.t.  A_in z <= b_in,  A_eq z = b_eq,  lower <= z <= upper.
///
/// Empty blocks may be left default-constructed. Bounds default to a free
/// variable when the vectors are empty; use +/-infinity for one-sided bounds.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_variables() const { return static_cast<int>(objective.size()); }

  /// Throws DimensionMismatch / InvalidArguments on malformed input.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd solution;  // empty unless Optimal
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

enum class PivotRule {
  // Lowest-index entering column, lowest-index leaving variable on ratio ties.
  Bland,
  // Most negative reduced cost; falls back to Bland after a run of
  // degenerate pivots.
  Dantzig,
};

struct LpOptions {
  double feas_tol = 1e-9;
  double pivot_tol = 1e-11;
  int max_iterations = 200000;
  PivotRule pivot_rule = PivotRule::Bland;
  // Tableau dump after every pivot when set.
  std::ostream* trace = nullptr;
};

/// Solver interface so an external engine can stand in for the built-in
/// simplex. Implementations must be deterministic functions of their input.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpOutcome solve(const LinearProgram& lp) = 0;
};

/// Dense two-phase tableau simplex. Throws NumericalBreakdown or
/// MaxIterationsExceeded; infeasible and unbounded programs are reported
/// through LpOutcome::status.
class SimplexSolver final : public LpSolver {
 public:
  SimplexSolver() = default;
  explicit SimplexSolver(LpOptions options) : options_(options) {}

  LpOutcome solve(const LinearProgram& lp) override;

  const LpOptions& options() const { return options_; }

 private:
  LpOptions options_;
};

/// Convenience wrapper around a fresh SimplexSolver.
LpOutcome solve(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace cinv
