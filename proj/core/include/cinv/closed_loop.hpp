#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cinv/geometry.hpp"
#include "cinv/scenario.hpp"
#include "cinv/system_family.hpp"

namespace cinv {

/// u = sum_i gamma_i u_i with gamma the minimal vertex decomposition of x.
/// vertex_inputs holds one column per vertex.
Eigen::VectorXd vertex_control_input(const Polytope& S,
                                     const Eigen::MatrixXd& vertex_inputs,
                                     const Eigen::VectorXd& x);

struct Trajectory {
  Eigen::MatrixXd states;  // n x (T+1)
  Eigen::MatrixXd inputs;  // m x T
  Eigen::VectorXd gauge;   // T+1
  Eigen::VectorXd delta;
  std::uint64_t policy_fingerprint = 0;
  // First t with x(t) outside S; from then on inputs are zero.
  std::optional<int> first_exit;

  int horizon() const { return static_cast<int>(inputs.cols()); }
  double max_gauge() const { return gauge.maxCoeff(); }
};

/// Vertex inputs are fixed once from delta, then the vertex law drives the
/// state for T steps. Leaving S is recorded, not thrown.
Trajectory simulate_closed_loop(const SystemFamily& f, const Eigen::VectorXd& delta,
                                const Polytope& S, const AffinePolicy& policy,
                                const Eigen::VectorXd& x0, int horizon);

/// Columns t, x_1..x_n, u_1..u_m, gauge. The final row has empty inputs.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Uniform draws from an explicit finite list of parameter values.
struct FiniteSupport {
  std::vector<Eigen::VectorXd> points;
};

using Distribution = std::variant<UniformBox, FiniteSupport>;

struct ViolationEstimate {
  double rate = 0.0;
  double standard_error = 0.0;
  int draws = 0;
  int failure_count = 0;
  std::uint64_t seed = 0;
  // At most `max_recorded` failing samples, in draw order.
  std::vector<Eigen::VectorXd> failures;
};

/// Fraction of M fresh draws at which the policy's vertex inputs are not
/// admissible. Table families need a FiniteSupport distribution
/// (DistributionUnavailable otherwise).
ViolationEstimate estimate_violation(const SystemFamily& f, const Polytope& S,
                                     const Polytope& U, const AffinePolicy& policy,
                                     const Distribution& distribution, int draws,
                                     std::uint64_t seed, double tol = 1e-8,
                                     int max_recorded = 100);

/// `count` points drawn uniformly from S by rejection from its vertex
/// bounding box.
std::vector<Eigen::VectorXd> random_points_in(const Polytope& S, int count,
                                              std::uint64_t seed);

}  // namespace cinv
