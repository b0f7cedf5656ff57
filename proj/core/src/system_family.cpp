#include "cinv/system_family.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

namespace cinv {

namespace {

[[noreturn]] void graph_error(const std::string& what) {
  throw Error(ErrorCode::InvalidGraph, what);
}

void require_shape(const Eigen::MatrixXd& M, Eigen::Index rows,
                   Eigen::Index cols, const std::string& name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw Error(ErrorCode::DimensionMismatch,
                name + " is " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Graph validate_graph(Graph g) {
  if (g.node_count <= 0) graph_error("graph has no nodes");
  if (g.floating.empty()) {
    throw Error(ErrorCode::NoFloatingNodes, "graph has no floating nodes");
  }
  if (g.inputs.empty()) {
    throw Error(ErrorCode::NoInputNodes, "graph has no input nodes");
  }
  std::sort(g.floating.begin(), g.floating.end());
  std::sort(g.inputs.begin(), g.inputs.end());

  std::vector<int> role(g.node_count + 1, 0);
  for (int v : g.floating) {
    if (v < 1 || v > g.node_count) graph_error("floating node out of range");
    if (role[v]) graph_error("node " + std::to_string(v) + " listed twice");
    role[v] = 1;
  }
  for (int v : g.inputs) {
    if (v < 1 || v > g.node_count) graph_error("input node out of range");
    if (role[v]) graph_error("node " + std::to_string(v) + " listed twice");
    role[v] = 2;
  }
  for (int v = 1; v <= g.node_count; ++v) {
    if (!role[v]) {
      graph_error("node " + std::to_string(v) + " is neither floating nor input");
    }
  }

  std::set<std::pair<int, int>> seen;
  for (auto& [a, b] : g.edges) {
    if (a < 1 || b < 1 || a > g.node_count || b > g.node_count) {
      graph_error("edge references an unknown node");
    }
    if (a == b) graph_error("self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) {
      graph_error("duplicate edge (" + std::to_string(a) + "," +
                  std::to_string(b) + ")");
    }
  }
  if (g.nominal_weights.size() != g.edge_count()) {
    graph_error("expected " + std::to_string(g.edge_count()) +
                " nominal weights, got " +
                std::to_string(g.nominal_weights.size()));
  }

  std::vector<std::vector<int>> adj(g.node_count + 1);
  for (const auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> visited(g.node_count + 1, 0);
  std::queue<int> frontier;
  frontier.push(1);
  visited[1] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int u : adj[v]) {
      if (!visited[u]) {
        visited[u] = 1;
        ++reached;
        frontier.push(u);
      }
    }
  }
  if (reached != g.node_count) graph_error("graph is not connected");
  return g;
}

Incidence build_incidence(const Graph& g) {
  const int E = g.edge_count();
  std::vector<int> row(g.node_count + 1, -1);
  std::vector<bool> is_input(g.node_count + 1, false);
  for (std::size_t k = 0; k < g.floating.size(); ++k) {
    row[g.floating[k]] = static_cast<int>(k);
  }
  for (std::size_t k = 0; k < g.inputs.size(); ++k) {
    row[g.inputs[k]] = static_cast<int>(k);
    is_input[g.inputs[k]] = true;
  }
  Incidence inc;
  inc.floating = Eigen::MatrixXd::Zero(g.floating.size(), E);
  inc.input = Eigen::MatrixXd::Zero(g.inputs.size(), E);
  for (int e = 0; e < E; ++e) {
    const auto [a, b] = g.edges[e];
    const int tail = std::min(a, b);
    const int head = std::max(a, b);
    (is_input[tail] ? inc.input : inc.floating)(row[tail], e) = 1.0;
    (is_input[head] ? inc.input : inc.floating)(row[head], e) = -1.0;
  }
  return inc;
}

SystemFamily build_network_family(const Graph& g) {
  Graph valid = validate_graph(g);
  Incidence inc = build_incidence(valid);
  const int n = static_cast<int>(valid.floating.size());
  const int m = static_cast<int>(valid.inputs.size());
  const int ell = valid.edge_count();
  Eigen::VectorXd nominal = valid.nominal_weights;
  SystemFamily f(NetworkModel{std::move(valid), std::move(inc)}, n, m, ell);
  f.nominal_ = std::move(nominal);
  return f;
}

SystemFamily make_affine_family(AffineModel model) {
  const auto n = model.A0.rows();
  const auto m = model.B0.cols();
  require_shape(model.A0, n, n, "A0");
  require_shape(model.B0, n, m, "B0");
  if (model.Ak.size() != model.Bk.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Ak and Bk must have the same number of coefficients");
  }
  for (std::size_t k = 0; k < model.Ak.size(); ++k) {
    require_shape(model.Ak[k], n, n, "A" + std::to_string(k + 1));
    require_shape(model.Bk[k], n, m, "B" + std::to_string(k + 1));
  }
  if (n == 0 || m == 0) {
    throw Error(ErrorCode::DimensionMismatch, "empty state or input space");
  }
  const int ell = static_cast<int>(model.Ak.size());
  return SystemFamily(std::move(model), static_cast<int>(n),
                      static_cast<int>(m), ell);
}

SystemFamily make_table_family(TableModel model) {
  if (model.A.empty() || model.A.size() != model.B.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "table needs matching, non-empty A and B lists");
  }
  const auto n = model.A.front().rows();
  const auto m = model.B.front().cols();
  for (std::size_t k = 0; k < model.A.size(); ++k) {
    require_shape(model.A[k], n, n, "A[" + std::to_string(k) + "]");
    require_shape(model.B[k], n, m, "B[" + std::to_string(k) + "]");
  }
  if (model.keys.empty()) {
    for (std::size_t k = 0; k < model.A.size(); ++k) {
      model.keys.push_back(Eigen::VectorXd::Constant(1, double(k + 1)));
    }
  }
  if (model.keys.size() != model.A.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one key per table entry");
  }
  const auto ell = model.keys.front().size();
  for (const auto& key : model.keys) {
    if (key.size() != ell) {
      throw Error(ErrorCode::DimensionMismatch, "table keys differ in length");
    }
  }
  return SystemFamily(std::move(model), static_cast<int>(n),
                      static_cast<int>(m), static_cast<int>(ell));
}

SystemFamily SystemFamily::with_nominal(Eigen::VectorXd delta) const {
  if (delta.size() != ell_) {
    throw Error(ErrorCode::DimensionMismatch, "nominal parameter length");
  }
  SystemFamily copy = *this;
  copy.nominal_ = std::move(delta);
  return copy;
}

SystemMatrices SystemFamily::instantiate(const Eigen::VectorXd& delta) const {
  if (delta.size() != ell_) {
    throw Error(ErrorCode::DimensionMismatch,
                "parameter has length " + std::to_string(delta.size()) +
                    ", family expects " + std::to_string(ell_));
  }
  if (const auto* net = std::get_if<NetworkModel>(&model_)) {
    const Eigen::MatrixXd& DF = net->incidence.floating;
    const Eigen::MatrixXd& DI = net->incidence.input;
    const Eigen::MatrixXd DFW = DF * delta.asDiagonal();
    SystemMatrices out;
    out.A = Eigen::MatrixXd::Identity(n_, n_) - DFW * DF.transpose();
    out.B = -DFW * DI.transpose();
    return out;
  }
  if (const auto* aff = std::get_if<AffineModel>(&model_)) {
    SystemMatrices out{aff->A0, aff->B0};
    for (int k = 0; k < ell_; ++k) {
      out.A += delta(k) * aff->Ak[k];
      out.B += delta(k) * aff->Bk[k];
    }
    return out;
  }
  const auto& table = std::get<TableModel>(model_);
  for (std::size_t k = 0; k < table.keys.size(); ++k) {
    if ((table.keys[k] - delta).cwiseAbs().maxCoeff() <= 1e-12) {
      return {table.A[k], table.B[k]};
    }
  }
  throw Error(ErrorCode::UnknownSample, "no table entry matches the sample");
}

SystemMatrices instantiate(const SystemFamily& f, const Eigen::VectorXd& delta) {
  return f.instantiate(delta);
}

namespace {

// One unshifted QR step H <- RQ on an upper Hessenberg matrix via Givens
// rotations.
void qr_step(Eigen::MatrixXd& H) {
  const Eigen::Index n = H.rows();
  std::vector<Eigen::JacobiRotation<double>> rotations(n > 0 ? n - 1 : 0);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    rotations[k].makeGivens(H(k, k), H(k + 1, k));
    H.applyOnTheLeft(k, k + 1, rotations[k].adjoint());
    H(k + 1, k) = 0.0;
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    H.applyOnTheRight(k, k + 1, rotations[k]);
  }
}

// Moduli of the diagonal 1x1/2x2 blocks, or nullopt when some unreduced
// block is larger than 2x2.
std::optional<double> block_radius(const Eigen::MatrixXd& H, double negligible) {
  const Eigen::Index n = H.rows();
  double radius = 0.0;
  Eigen::Index k = 0;
  while (k < n) {
    const bool coupled = k + 1 < n && std::abs(H(k + 1, k)) > negligible;
    if (!coupled) {
      radius = std::max(radius, std::abs(H(k, k)));
      ++k;
      continue;
    }
    if (k + 2 < n && std::abs(H(k + 2, k + 1)) > negligible) return std::nullopt;
    const double a = H(k, k), b = H(k, k + 1), c = H(k + 1, k), d = H(k + 1, k + 1);
    const double tr = a + d;
    const double det = a * d - b * c;
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
    radius = std::max({radius, std::abs(tr / 2.0 + disc),
                       std::abs(tr / 2.0 - disc)});
    k += 2;
  }
  return radius;
}

}  // namespace

SpectralEstimate spectral_radius_estimate(const Eigen::MatrixXd& A, double tol,
                                          int max_iterations) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
  }
  SpectralEstimate est;
  if (A.size() == 0) {
    est.converged = true;
    return est;
  }
  Eigen::MatrixXd H = A.rows() > 2
                          ? Eigen::MatrixXd(Eigen::HessenbergDecomposition<
                                                Eigen::MatrixXd>(A)
                                                .matrixH())
                          : A;
  for (Eigen::Index i = 2; i < H.rows(); ++i) {
    H.col(i - 2).tail(H.rows() - i).setZero();
  }
  const double scale = std::max(H.norm(), std::numeric_limits<double>::min());
  const double negligible = std::max(1e-14, 1e-3 * tol) * scale;

  double previous = -1.0;
  int stable = 0;
  for (int it = 0; it <= max_iterations; ++it) {
    est.iterations = it;
    if (auto r = block_radius(H, negligible)) {
      stable = std::abs(*r - previous) <= tol * std::max(1.0, *r) ? stable + 1 : 0;
      previous = *r;
      est.radius = *r;
      if (stable >= 3) {
        est.converged = true;
        return est;
      }
    } else {
      stable = 0;
    }
    qr_step(H);
  }
  if (previous >= 0.0) est.radius = previous;
  return est;
}

}  // namespace cinv
