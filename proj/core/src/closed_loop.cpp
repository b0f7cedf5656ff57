#include "cinv/closed_loop.hpp"

#include <cmath>
#include <ostream>

#include "cinv/random.hpp"

namespace cinv {

Eigen::VectorXd vertex_control_input(const Polytope& S,
                                     const Eigen::MatrixXd& vertex_inputs,
                                     const Eigen::VectorXd& x) {
  if (vertex_inputs.cols() != S.vertex_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "need one input column per vertex (" +
                    std::to_string(S.vertex_count()) + ")");
  }
  return vertex_inputs * vertex_decompose(S, x);
}

Trajectory simulate_closed_loop(const SystemFamily& f, const Eigen::VectorXd& delta,
                                const Polytope& S, const AffinePolicy& policy,
                                const Eigen::VectorXd& x0, int horizon) {
  if (horizon < 1) {
    throw Error(ErrorCode::InvalidArguments, "horizon must be >= 1");
  }
  if (S.dim() != f.state_dim() || policy.vertex_count() != S.vertex_count() ||
      policy.input_dim() != f.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "policy, state set and system disagree in shape");
  }
  if (!contains(S, x0)) {
    throw Error(ErrorCode::DecompositionInfeasible,
                "initial state lies outside the state set");
  }
  const SystemMatrices sys = f.instantiate(delta);
  const Eigen::MatrixXd vertex_inputs = policy_vertex_inputs(policy, delta);

  Trajectory traj;
  traj.delta = delta;
  traj.policy_fingerprint = fingerprint(policy);
  traj.states.resize(f.state_dim(), horizon + 1);
  traj.inputs.setZero(f.input_dim(), horizon);
  traj.gauge.resize(horizon + 1);

  Eigen::VectorXd x = x0;
  for (int t = 0; t <= horizon; ++t) {
    traj.states.col(t) = x;
    traj.gauge(t) = minkowski_gauge(S, x);
    if (t == horizon) break;
    if (!traj.first_exit && !contains(S, x)) traj.first_exit = t;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(f.input_dim());
    if (!traj.first_exit) u = vertex_control_input(S, vertex_inputs, x);
    traj.inputs.col(t) = u;
    x = sys.A * x + sys.B * u;
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto n = traj.states.rows();
  const auto m = traj.inputs.rows();
  out << "t";
  for (Eigen::Index k = 0; k < n; ++k) out << ",x_" << k + 1;
  for (Eigen::Index k = 0; k < m; ++k) out << ",u_" << k + 1;
  out << ",gauge\n";
  const auto old_precision = out.precision(17);
  for (Eigen::Index t = 0; t < traj.states.cols(); ++t) {
    out << t;
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << traj.states(k, t);
    for (Eigen::Index k = 0; k < m; ++k) {
      out << ',';
      if (t < traj.inputs.cols()) out << traj.inputs(k, t);
    }
    out << ',' << traj.gauge(t) << '\n';
  }
  out.precision(old_precision);
}

ViolationEstimate estimate_violation(const SystemFamily& f, const Polytope& S,
                                     const Polytope& U, const AffinePolicy& policy,
                                     const Distribution& distribution, int draws,
                                     std::uint64_t seed, double tol,
                                     int max_recorded) {
  if (draws < 1) {
    throw Error(ErrorCode::InvalidArguments, "need at least one draw");
  }
  const auto* box = std::get_if<UniformBox>(&distribution);
  const auto* finite = std::get_if<FiniteSupport>(&distribution);
  if (f.is_table() && !finite) {
    throw Error(ErrorCode::DistributionUnavailable,
                "table families can only be sampled from a finite support");
  }
  if (box && (box->lower.size() != f.param_dim() ||
              box->upper.size() != f.param_dim())) {
    throw Error(ErrorCode::DimensionMismatch, "distribution bounds length");
  }
  if (finite && finite->points.empty()) {
    throw Error(ErrorCode::DistributionUnavailable, "empty finite support");
  }

  Rng rng(seed);
  ViolationEstimate est;
  est.draws = draws;
  est.seed = seed;
  Eigen::VectorXd delta(f.param_dim());
  for (int k = 0; k < draws; ++k) {
    if (box) {
      for (Eigen::Index c = 0; c < delta.size(); ++c) {
        delta(c) = rng.uniform(box->lower(c), box->upper(c));
      }
    } else {
      const auto n = static_cast<std::uint64_t>(finite->points.size());
      delta = finite->points[static_cast<std::size_t>(rng.next() % n)];
    }
    if (!is_admissible(f, S, U, delta, evaluate_policy(policy, delta), tol)) {
      ++est.failure_count;
      if (static_cast<int>(est.failures.size()) < max_recorded) {
        est.failures.push_back(delta);
      }
    }
  }
  est.rate = static_cast<double>(est.failure_count) / draws;
  est.standard_error = std::sqrt(est.rate * (1.0 - est.rate) / draws);
  return est;
}

std::vector<Eigen::VectorXd> random_points_in(const Polytope& S, int count,
                                              std::uint64_t seed) {
  const Eigen::VectorXd lo = S.vertices().rowwise().minCoeff();
  const Eigen::VectorXd hi = S.vertices().rowwise().maxCoeff();
  Rng rng(seed);
  std::vector<Eigen::VectorXd> points;
  points.reserve(count);
  Eigen::VectorXd x(S.dim());
  long long attempts = 0;
  while (static_cast<int>(points.size()) < count) {
    if (++attempts > 1000LL * count + 100000) {
      throw Error(ErrorCode::NumericalBreakdown,
                  "rejection sampling accepts too rarely");
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(lo(k), hi(k));
    if (contains(S, x, 0.0)) points.push_back(x);
  }
  return points;
}

}  // namespace cinv
