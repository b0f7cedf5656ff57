#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cinv/geometry.hpp"
#include "cinv/lp.hpp"
#include "cinv/system_family.hpp"

namespace cinv {

/// Independent uniform draws on lower <= delta <= upper.
struct UniformBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Samples read from a file; the generating distribution is unknown.
struct ExternalSource {
  std::string path;
};

/**
 * Ordered K-multisample of parameter vectors. Order matters: the policy
 * solver and the greedy support search are deterministic functions of the
 * ordered list.
 */
struct ScenarioSet {
  std::vector<Eigen::VectorXd> samples;
  std::variant<ExternalSource, UniformBox> distribution;
  std::optional<std::uint64_t> seed;

  int size() const { return static_cast<int>(samples.size()); }
  int param_dim() const {
    return samples.empty() ? 0 : static_cast<int>(samples.front().size());
  }
};

/// Throws InvalidArguments / DimensionMismatch when K = 0, dimensions
/// disagree, or a uniform-box sample lies outside its bounds.
void validate_scenarios(const ScenarioSet& s);

ScenarioSet sample_uniform(const UniformBox& box, int count, std::uint64_t seed);

/// One sample per row, comma separated; a non-numeric first row is treated
/// as a header.
ScenarioSet read_scenarios_csv(std::istream& in, std::string source = {});
ScenarioSet load_scenarios_csv(const std::string& path);

/// Per-vertex affine maps pi_i(delta) = C_i delta + d_i.
struct AffinePolicy {
  std::vector<Eigen::MatrixXd> gains;    // N blocks, m x l
  std::vector<Eigen::VectorXd> offsets;  // N blocks, m
  std::uint64_t scenario_fingerprint = 0;

  int vertex_count() const { return static_cast<int>(offsets.size()); }
  int input_dim() const {
    return offsets.empty() ? 0 : static_cast<int>(offsets.front().size());
  }
  int param_dim() const {
    return gains.empty() ? 0 : static_cast<int>(gains.front().cols());
  }
};

AffinePolicy zero_policy(int vertex_count, int input_dim, int param_dim);

/// Stacked inputs (u_1; ...; u_N), u_i = C_i delta + d_i.
Eigen::VectorXd evaluate_policy(const AffinePolicy& p, const Eigen::VectorXd& delta);

/// Same values as evaluate_policy, one column per vertex.
Eigen::MatrixXd policy_vertex_inputs(const AffinePolicy& p,
                                     const Eigen::VectorXd& delta);

/// Max-norm distance over every gain and offset entry.
double policy_distance(const AffinePolicy& a, const AffinePolicy& b);

std::uint64_t fingerprint(const AffinePolicy& p);
std::uint64_t fingerprint(const ScenarioSet& s);

/// Constraint rows { u | G u <= l } for one vertex and one sample: the first
/// `input_rows` rows are H u <= 1, the rest F B u <= 1 - F A x_i.
struct VertexConstraintBlock {
  Eigen::MatrixXd G;
  Eigen::VectorXd l;
  int input_rows = 0;
};

std::vector<VertexConstraintBlock> assemble_vertex_constraints(
    const SystemFamily& f, const Polytope& S, const Polytope& U,
    const Eigen::VectorXd& delta);

/// u_i in U and A x_i + B u_i in S (within tol) for every vertex i.
bool is_admissible(const SystemFamily& f, const Polytope& S, const Polytope& U,
                   const Eigen::VectorXd& delta, const Eigen::VectorXd& stacked_u,
                   double tol = 1e-8);

struct ScenarioOptions {
  LpOptions lp;
  // Max-norm tolerance for "same solution" in the support search.
  double solution_tol = 1e-6;
  // Samples whose cuts join the working set per round.
  int cuts_per_round = 8;
  int max_rounds = 10000;
  // Re-solve for every retained sample instead of replaying traces.
  bool exhaustive_greedy = false;
};

/// The first constraint the solver could not satisfy: the most violated row
/// at the last feasible working-set iterate of the lowest failing vertex.
struct InfeasibilityReport {
  int sample = -1;
  int vertex = -1;
  int row = -1;
  double violation = 0.0;
  std::string message;
};

struct PolicySolution {
  std::optional<AffinePolicy> policy;
  std::optional<InfeasibilityReport> infeasibility;
  // Sample indices that entered each vertex's working set, ascending.
  std::vector<std::vector<int>> active_samples;
  int lp_solves = 0;

  bool feasible() const { return policy.has_value(); }
};

/// Minimum 1-norm affine policy meeting every sample's vertex constraints.
PolicySolution solve_affine_policy(const SystemFamily& f, const Polytope& S,
                                   const Polytope& U, const ScenarioSet& scenarios,
                                   const ScenarioOptions& options = {});

/// Same program restricted to a subset of the samples (indices ascending).
PolicySolution solve_affine_policy(const SystemFamily& f, const Polytope& S,
                                   const Polytope& U, const ScenarioSet& scenarios,
                                   const std::vector<int>& subset,
                                   const ScenarioOptions& options = {});

struct ConstantInputSolution {
  std::optional<Eigen::MatrixXd> inputs;  // m x N
  std::optional<InfeasibilityReport> infeasibility;

  bool feasible() const { return inputs.has_value(); }
};

/// One input per vertex valid for all samples at once (gains fixed at 0).
ConstantInputSolution solve_constant_input(const SystemFamily& f,
                                           const Polytope& S, const Polytope& U,
                                           const ScenarioSet& scenarios,
                                           const ScenarioOptions& options = {});

struct SupportSubsample {
  std::vector<int> indices;  // ascending, 0-based
  AffinePolicy policy;       // solution on the full sample set
  int resolves = 0;

  int size() const { return static_cast<int>(indices.size()); }
};

/// Single ascending pass: drop a sample whenever the policy re-solved
/// without it matches the full-sample policy within solution_tol. Throws
/// InvalidArguments when the full program is infeasible.
SupportSubsample greedy_support_subsample(const SystemFamily& f,
                                          const Polytope& S, const Polytope& U,
                                          const ScenarioSet& scenarios,
                                          const ScenarioOptions& options = {});

}  // namespace cinv
