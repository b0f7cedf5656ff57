#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cinv/geometry.hpp"
#include "cinv/scenario.hpp"
#include "cinv/system_family.hpp"

namespace cinv {

struct MinorOptions {
  double det_tol = 1e-10;
  double tol = 1e-9;
  // Row subsets examined per vertex before giving up with an error.
  long long enumeration_cap = 1'000'000;
};

/**
 * An invertible m x m row-submatrix of G = col(H, F B) whose basic point
 * G_I^{-1} l_I satisfies every remaining row. Q indexes rows of H, P rows
 * of F (both 0-based).
 */
struct MinorWitness {
  int vertex = -1;
  int sample = -1;
  std::vector<int> input_rows;  // Q
  std::vector<int> state_rows;  // P
  Eigen::MatrixXd submatrix;
  Eigen::VectorXd point;
  double determinant = 0.0;
};

struct VertexVerdict {
  int vertex = -1;
  std::optional<MinorWitness> witness;
  long long subsets_examined = 0;
  long long invertible_minors = 0;
  std::string failure;  // empty when a witness exists

  bool feasible() const { return witness.has_value(); }
};

struct SingleSampleResult {
  bool feasible = false;
  std::vector<VertexVerdict> vertices;
};

/// Minor enumeration for one sample: vertex i admits an input iff some
/// invertible minor's basic point meets the remaining rows. Requires
/// state_dim >= input_dim (DimensionPrecondition) and at most
/// enumeration_cap subsets per vertex (EnumerationCapExceeded).
SingleSampleResult single_sample_iff(const SystemFamily& f, const Polytope& S,
                                     const Polytope& U,
                                     const Eigen::VectorXd& delta,
                                     const MinorOptions& options = {},
                                     int sample_index = -1);

struct MultisampleResult {
  bool passed = true;
  // (vertex, sample) of the first failure in sample-major order.
  std::optional<std::pair<int, int>> first_failure;
  std::vector<SingleSampleResult> per_sample;
};

/// Necessary condition for a non-empty affine policy set: every sample must
/// pass single_sample_iff. Passing does not imply feasibility.
MultisampleResult multisample_necessary(const SystemFamily& f, const Polytope& S,
                                        const Polytope& U,
                                        const ScenarioSet& scenarios,
                                        const MinorOptions& options = {},
                                        bool stop_at_first_failure = true);

/// Plain LP feasibility of the vertex blocks of one sample; the oracle the
/// minor enumeration must agree with.
bool vertex_blocks_feasible(const SystemFamily& f, const Polytope& S,
                            const Polytope& U, const Eigen::VectorXd& delta);

}  // namespace cinv
