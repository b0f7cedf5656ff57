#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cinv/error.hpp"

namespace cinv {

/**
 * Undirected weighted graph whose nodes (labelled 1..node_count) are split
 * into floating and input nodes. Each edge is stored oriented from its
 * smaller to its larger endpoint.
 */
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> floating;
  std::vector<int> inputs;
  Eigen::VectorXd nominal_weights;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Normalises orientation and node-set order, then checks the partition,
/// edge endpoints, weight count and connectivity. Throws InvalidGraph,
/// NoFloatingNodes or NoInputNodes.
Graph validate_graph(Graph g);

struct Incidence {
  Eigen::MatrixXd floating;  // n_F x |E|
  Eigen::MatrixXd input;     // m x |E|
};

/// Signed incidence matrix split into floating and input rows, rows ordered
/// by ascending node label.
Incidence build_incidence(const Graph& g);

/// x+ = A(w) x + B(w) u with A = I - D_F W D_F', B = -D_F W D_I'.
struct NetworkModel {
  Graph graph;
  Incidence incidence;
};

/// A(d) = A0 + sum_k d_k A_k, B(d) = B0 + sum_k d_k B_k.
struct AffineModel {
  Eigen::MatrixXd A0;
  std::vector<Eigen::MatrixXd> Ak;
  Eigen::MatrixXd B0;
  std::vector<Eigen::MatrixXd> Bk;
};

/// Measured (A, B) snapshots looked up by key.
struct TableModel {
  std::vector<Eigen::VectorXd> keys;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::MatrixXd> B;
};

struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

class SystemFamily {
 public:
  using Model = std::variant<NetworkModel, AffineModel, TableModel>;

  const Model& model() const { return model_; }
  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  int param_dim() const { return ell_; }

  bool is_network() const { return std::holds_alternative<NetworkModel>(model_); }
  bool is_table() const { return std::holds_alternative<TableModel>(model_); }

  /// Nominal parameter: the network's nominal weights, or whatever was
  /// attached with with_nominal().
  const std::optional<Eigen::VectorXd>& nominal() const { return nominal_; }
  SystemFamily with_nominal(Eigen::VectorXd delta) const;

  SystemMatrices instantiate(const Eigen::VectorXd& delta) const;

 private:
  SystemFamily(Model model, int n, int m, int ell)
      : model_(std::move(model)), n_(n), m_(m), ell_(ell) {}

  friend SystemFamily build_network_family(const Graph&);
  friend SystemFamily make_affine_family(AffineModel);
  friend SystemFamily make_table_family(TableModel);

  Model model_;
  int n_;
  int m_;
  int ell_;
  std::optional<Eigen::VectorXd> nominal_;
};

SystemFamily build_network_family(const Graph& g);

/// Throws DimensionMismatch when the coefficient matrices disagree.
SystemFamily make_affine_family(AffineModel model);

/// Keys default to the scalar entry index 1..T when left empty.
SystemFamily make_table_family(TableModel model);

/// Free-function form of SystemFamily::instantiate.
SystemMatrices instantiate(const SystemFamily& f, const Eigen::VectorXd& delta);

struct SpectralEstimate {
  double radius = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest eigenvalue modulus by unshifted QR iteration on the Hessenberg
/// form. Unconverged runs are reported through `converged`, not thrown.
SpectralEstimate spectral_radius_estimate(const Eigen::MatrixXd& A,
                                          double tol = 1e-9,
                                          int max_iterations = 20000);

}  // namespace cinv
