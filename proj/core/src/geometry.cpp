#include "cinv/geometry.hpp"

#include <cmath>
#include <sstream>

#include "cinv/lp.hpp"

namespace cinv {

namespace {

void require_dim(const Polytope& p, const Eigen::VectorXd& x) {
  if (x.size() != p.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "point has dimension " + std::to_string(x.size()) +
                    ", polytope has " + std::to_string(p.dim()));
  }
}

// Is 0 a convex combination of the columns of V?
bool origin_in_hull(const Eigen::MatrixXd& V) {
  const int n = static_cast<int>(V.rows());
  const int N = static_cast<int>(V.cols());
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(N);
  lp.A_eq.resize(n + 1, N);
  lp.A_eq.topRows(n) = V;
  lp.A_eq.row(n).setOnes();
  lp.b_eq = Eigen::VectorXd::Zero(n + 1);
  lp.b_eq(n) = 1.0;
  lp.lower = Eigen::VectorXd::Zero(N);
  return solve(lp).optimal();
}

}  // namespace

std::vector<PolytopeIssue> check_polytope(const Eigen::MatrixXd& facets,
                                          const Eigen::MatrixXd& vertices,
                                          double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArguments, "tolerance must be positive");
  }
  if (facets.cols() != vertices.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "facet matrix has " + std::to_string(facets.cols()) +
                    " columns but vertices have dimension " +
                    std::to_string(vertices.rows()));
  }
  if (facets.rows() == 0 || vertices.cols() == 0) {
    throw Error(ErrorCode::InvalidArguments, "empty facet or vertex list");
  }
  if (!facets.allFinite() || !vertices.allFinite()) {
    throw Error(ErrorCode::InvalidArguments, "non-finite polytope data");
  }

  std::vector<PolytopeIssue> issues;
  const int n = static_cast<int>(facets.cols());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(facets);
  qr.setThreshold(1e-10);
  if (qr.rank() < n) {
    issues.push_back({ErrorCode::RankDeficientFacets, -1, -1, 0.0,
                      "facet matrix has rank " + std::to_string(qr.rank()) +
                          " < " + std::to_string(n)});
  }

  const Eigen::MatrixXd images = facets * vertices;  // p x N
  for (int v = 0; v < images.cols(); ++v) {
    for (int k = 0; k < images.rows(); ++k) {
      const double slack = 1.0 - images(k, v);
      if (slack < -tol) {
        std::ostringstream msg;
        msg << "vertex " << v << " violates facet " << k << " by " << -slack;
        issues.push_back(
            {ErrorCode::VertexOutsideFacets, v, k, slack, msg.str()});
      }
    }
  }
  for (int k = 0; k < images.rows(); ++k) {
    const double support = images.row(k).maxCoeff();
    if (support < 1.0 - tol) {
      std::ostringstream msg;
      msg << "facet " << k << " is not touched by any vertex (max "
          << support << ")";
      issues.push_back(
          {ErrorCode::UnsupportedFacet, -1, k, 1.0 - support, msg.str()});
    }
  }
  if (!origin_in_hull(vertices)) {
    issues.push_back({ErrorCode::OriginNotInterior, -1, -1, 0.0,
                      "origin is not in the convex hull of the vertices"});
  }
  return issues;
}

Polytope validate_polytope(const Eigen::MatrixXd& facets,
                           const Eigen::MatrixXd& vertices, double tol) {
  const auto issues = check_polytope(facets, vertices, tol);
  if (!issues.empty()) {
    std::string all;
    for (const auto& issue : issues) {
      if (!all.empty()) all += "; ";
      all += issue.message;
    }
    throw Error(issues.front().code, all);
  }
  return Polytope(facets, vertices);
}

Polytope validate_polytope(const Eigen::MatrixXd& facets,
                           const Eigen::VectorXd& rhs,
                           const Eigen::MatrixXd& vertices, double tol) {
  if (rhs.size() != facets.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "rhs length differs from facets");
  }
  if ((rhs.array() <= 0.0).any()) {
    throw Error(ErrorCode::OriginNotInterior,
                "right-hand side must be strictly positive");
  }
  const Eigen::MatrixXd scaled = rhs.cwiseInverse().asDiagonal() * facets;
  return validate_polytope(scaled, vertices, tol);
}

Polytope make_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n || n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "box bounds differ in length");
  }
  if ((lower.array() >= 0.0).any() || (upper.array() <= 0.0).any()) {
    throw Error(ErrorCode::OriginNotInterior,
                "box must satisfy lower < 0 < upper");
  }
  if (n > 20) {
    throw Error(ErrorCode::InvalidArguments, "box vertex list too large");
  }
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * n, n);
  for (int k = 0; k < n; ++k) {
    F(k, k) = 1.0 / upper(k);
    F(n + k, k) = 1.0 / lower(k);
  }
  const int N = 1 << n;
  Eigen::MatrixXd V(n, N);
  for (int v = 0; v < N; ++v) {
    for (int k = 0; k < n; ++k) {
      // Bit (n-1-k) set selects the lower bound of coordinate k.
      const bool low = (v >> (n - 1 - k)) & 1;
      V(k, v) = low ? lower(k) : upper(k);
    }
  }
  return validate_polytope(F, V);
}

Polytope make_cross_polytope(const Eigen::VectorXd& plus,
                             const Eigen::VectorXd& minus) {
  const int n = static_cast<int>(plus.size());
  if (minus.size() != n || n == 0) {
    throw Error(ErrorCode::DimensionMismatch, "radius vectors differ");
  }
  if ((plus.array() <= 0.0).any() || (minus.array() <= 0.0).any()) {
    throw Error(ErrorCode::OriginNotInterior, "radii must be positive");
  }
  if (n > 20) {
    throw Error(ErrorCode::InvalidArguments, "cross-polytope facet list too large");
  }
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, 2 * n);
  for (int k = 0; k < n; ++k) {
    V(k, 2 * k) = plus(k);
    V(k, 2 * k + 1) = -minus(k);
  }
  const int p = 1 << n;
  Eigen::MatrixXd F(p, n);
  for (int r = 0; r < p; ++r) {
    for (int k = 0; k < n; ++k) {
      const bool neg = (r >> (n - 1 - k)) & 1;
      F(r, k) = neg ? -1.0 / minus(k) : 1.0 / plus(k);
    }
  }
  return validate_polytope(F, V);
}

bool contains(const Polytope& p, const Eigen::VectorXd& x, double tol) {
  require_dim(p, x);
  return ((p.facets() * x).array() <= 1.0 + tol).all();
}

double minkowski_gauge(const Polytope& p, const Eigen::VectorXd& x) {
  require_dim(p, x);
  return std::max(0.0, (p.facets() * x).maxCoeff());
}

Eigen::VectorXd vertex_decompose(const Polytope& p, const Eigen::VectorXd& x,
                                 double tol) {
  require_dim(p, x);
  if (!contains(p, x, tol)) {
    throw Error(ErrorCode::DecompositionInfeasible,
                "point has gauge " + std::to_string(minkowski_gauge(p, x)));
  }
  const int N = p.vertex_count();
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Ones(N);
  lp.A_eq = p.vertices();
  lp.b_eq = x;
  lp.lower = Eigen::VectorXd::Zero(N);
  lp.upper = Eigen::VectorXd::Ones(N);
  const LpOutcome out = solve(lp);
  if (!out.optimal()) {
    throw Error(ErrorCode::DecompositionInfeasible,
                "no vertex combination reproduces the point");
  }
  return out.solution;
}

}  // namespace cinv
