#include "cinv/feasibility.hpp"

#include <cmath>
#include <sstream>

#include "cinv/lp.hpp"

namespace cinv {

namespace {

long long binomial_capped(int n, int k, long long cap) {
  if (k < 0 || k > n) return 0;
  long double acc = 1.0L;
  for (int i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<long long>(std::llround(static_cast<double>(acc)));
}

// Advances a strictly increasing index tuple over {0..n-1} in lexicographic
// order; false once exhausted.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

VertexVerdict check_vertex(const VertexConstraintBlock& block, int vertex,
                           int sample, const MinorOptions& opt) {
  const int rows = static_cast<int>(block.G.rows());
  const int m = static_cast<int>(block.G.cols());
  VertexVerdict verdict;
  verdict.vertex = vertex;

  std::vector<int> idx(m);
  for (int k = 0; k < m; ++k) idx[k] = k;
  Eigen::MatrixXd sub(m, m);
  Eigen::VectorXd rhs(m);
  do {
    ++verdict.subsets_examined;
    for (int k = 0; k < m; ++k) {
      sub.row(k) = block.G.row(idx[k]);
      rhs(k) = block.l(idx[k]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sub);
    const double det = lu.determinant();
    if (!(std::abs(det) > opt.det_tol)) continue;
    ++verdict.invertible_minors;
    const Eigen::VectorXd point = lu.solve(rhs);
    const Eigen::VectorXd residual = block.G * point - block.l;
    if (residual.maxCoeff() > opt.tol) continue;

    MinorWitness w;
    w.vertex = vertex;
    w.sample = sample;
    for (int r : idx) {
      if (r < block.input_rows) {
        w.input_rows.push_back(r);
      } else {
        w.state_rows.push_back(r - block.input_rows);
      }
    }
    w.submatrix = sub;
    w.point = point;
    w.determinant = det;
    verdict.witness = std::move(w);
    return verdict;
  } while (next_combination(idx, rows));

  std::ostringstream msg;
  msg << "vertex " << vertex << ": none of " << verdict.invertible_minors
      << " invertible minors (of " << verdict.subsets_examined
      << " row subsets) yields an admissible basic input";
  verdict.failure = msg.str();
  return verdict;
}

}  // namespace

SingleSampleResult single_sample_iff(const SystemFamily& f, const Polytope& S,
                                     const Polytope& U,
                                     const Eigen::VectorXd& delta,
                                     const MinorOptions& options,
                                     int sample_index) {
  const int m = f.input_dim();
  if (f.state_dim() < m) {
    throw Error(ErrorCode::DimensionPrecondition,
                "minor enumeration needs state dimension >= input dimension");
  }
  const int rows = U.facet_count() + S.facet_count();
  if (binomial_capped(rows, m, options.enumeration_cap) > options.enumeration_cap) {
    throw Error(ErrorCode::EnumerationCapExceeded,
                "choosing " + std::to_string(m) + " of " + std::to_string(rows) +
                    " rows exceeds the cap of " +
                    std::to_string(options.enumeration_cap));
  }
  const auto blocks = assemble_vertex_constraints(f, S, U, delta);
  SingleSampleResult result;
  result.feasible = true;
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
    result.vertices.push_back(check_vertex(blocks[i], i, sample_index, options));
    if (!result.vertices.back().feasible()) result.feasible = false;
  }
  return result;
}

MultisampleResult multisample_necessary(const SystemFamily& f, const Polytope& S,
                                        const Polytope& U,
                                        const ScenarioSet& scenarios,
                                        const MinorOptions& options,
                                        bool stop_at_first_failure) {
  validate_scenarios(scenarios);
  MultisampleResult result;
  for (int j = 0; j < scenarios.size(); ++j) {
    SingleSampleResult r =
        single_sample_iff(f, S, U, scenarios.samples[j], options, j);
    if (!r.feasible && result.passed) {
      result.passed = false;
      for (const auto& v : r.vertices) {
        if (!v.feasible()) {
          result.first_failure = std::make_pair(v.vertex, j);
          break;
        }
      }
    }
    result.per_sample.push_back(std::move(r));
    if (!result.passed && stop_at_first_failure) break;
  }
  return result;
}

bool vertex_blocks_feasible(const SystemFamily& f, const Polytope& S,
                            const Polytope& U, const Eigen::VectorXd& delta) {
  for (const auto& block : assemble_vertex_constraints(f, S, U, delta)) {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(block.G.cols());
    lp.A_in = block.G;
    lp.b_in = block.l;
    if (!solve(lp).optimal()) return false;
  }
  return true;
}

}  // namespace cinv
