#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cinv/error.hpp"

namespace cinv {

inline constexpr double kDefaultGeometryTol = 1e-8;

/// One violated invariant found while validating a polytope description.
struct PolytopeIssue {
  ErrorCode code;
  // -1 when not applicable.
  int vertex = -1;
  int row = -1;
  double slack = 0.0;
  std::string message;
};

/**
 * A C-polytope held in both representations: the half-space form
 * {x | F x <= 1} and the vertex list. Instances are only produced by the
 * validating factories below and are immutable afterwards.
 *
 * Vertices are stored column-wise (dim x vertex_count).
 */
class Polytope {
 public:
  const Eigen::MatrixXd& facets() const { return facets_; }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Eigen::VectorXd vertex(int i) const { return vertices_.col(i); }

  int dim() const { return static_cast<int>(facets_.cols()); }
  int facet_count() const { return static_cast<int>(facets_.rows()); }
  int vertex_count() const { return static_cast<int>(vertices_.cols()); }

 private:
  Polytope(Eigen::MatrixXd facets, Eigen::MatrixXd vertices)
      : facets_(std::move(facets)), vertices_(std::move(vertices)) {}

  friend Polytope validate_polytope(const Eigen::MatrixXd&,
                                    const Eigen::MatrixXd&, double);

  Eigen::MatrixXd facets_;
  Eigen::MatrixXd vertices_;
};

/// Lists every invariant the (facets, vertices) pair violates. Empty means
/// the pair describes a valid C-polytope. Vertices are columns.
std::vector<PolytopeIssue> check_polytope(const Eigen::MatrixXd& facets,
                                          const Eigen::MatrixXd& vertices,
                                          double tol = kDefaultGeometryTol);

/// Throws Error carrying the code of the first issue; the message lists all
/// of them.
Polytope validate_polytope(const Eigen::MatrixXd& facets,
                           const Eigen::MatrixXd& vertices,
                           double tol = kDefaultGeometryTol);

/// General right-hand side G x <= b with b > 0; rows are rescaled to unit RHS.
Polytope validate_polytope(const Eigen::MatrixXd& facets,
                           const Eigen::VectorXd& rhs,
                           const Eigen::MatrixXd& vertices,
                           double tol = kDefaultGeometryTol);

/// Axis-aligned box lower <= x <= upper with lower < 0 < upper componentwise.
/// Vertex order: first coordinate varies slowest, upper bound before lower.
Polytope make_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Convex hull of the 2n axis points +plus_k e_k and -minus_k e_k (all radii
/// positive). Vertices are ordered (+e_1, -e_1, +e_2, -e_2, ...); one facet
/// per orthant.
Polytope make_cross_polytope(const Eigen::VectorXd& plus,
                             const Eigen::VectorXd& minus);

/// F x <= (1 + tol) componentwise.
bool contains(const Polytope& p, const Eigen::VectorXd& x,
              double tol = kDefaultGeometryTol);

/// Minkowski gauge: smallest lambda >= 0 with x in lambda * P.
double minkowski_gauge(const Polytope& p, const Eigen::VectorXd& x);

/// Minimal-sum convex-cone coefficients gamma in [0,1]^N with
/// vertices * gamma = x. The sum equals the gauge of x. Throws
/// DecompositionInfeasible when x lies outside P.
Eigen::VectorXd vertex_decompose(const Polytope& p, const Eigen::VectorXd& x,
                                 double tol = kDefaultGeometryTol);

}  // namespace cinv
