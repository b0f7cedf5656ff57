#include "cinv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cinv/random.hpp"

namespace cinv {

void validate_scenarios(const ScenarioSet& s) {
  if (s.samples.empty()) {
    throw Error(ErrorCode::InvalidArguments, "scenario set is empty");
  }
  const auto ell = s.samples.front().size();
  for (std::size_t j = 0; j < s.samples.size(); ++j) {
    if (s.samples[j].size() != ell) {
      throw Error(ErrorCode::DimensionMismatch,
                  "sample " + std::to_string(j) + " has length " +
                      std::to_string(s.samples[j].size()));
    }
    if (!s.samples[j].allFinite()) {
      throw Error(ErrorCode::InvalidArguments,
                  "sample " + std::to_string(j) + " is not finite");
    }
  }
  if (const auto* box = std::get_if<UniformBox>(&s.distribution)) {
    if (box->lower.size() != ell || box->upper.size() != ell) {
      throw Error(ErrorCode::DimensionMismatch, "uniform bounds length");
    }
    for (std::size_t j = 0; j < s.samples.size(); ++j) {
      const auto& d = s.samples[j];
      if ((d.array() < box->lower.array()).any() ||
          (d.array() > box->upper.array()).any()) {
        throw Error(ErrorCode::InvalidArguments,
                    "sample " + std::to_string(j) + " outside uniform bounds");
      }
    }
  }
}

ScenarioSet sample_uniform(const UniformBox& box, int count, std::uint64_t seed) {
  if (count < 1) {
    throw Error(ErrorCode::InvalidArguments, "scenario count must be >= 1");
  }
  if (box.lower.size() != box.upper.size() || box.lower.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "uniform bounds length");
  }
  if ((box.lower.array() > box.upper.array()).any()) {
    throw Error(ErrorCode::InvalidArguments, "uniform lower exceeds upper");
  }
  Rng rng(seed);
  ScenarioSet s;
  s.distribution = box;
  s.seed = seed;
  s.samples.reserve(count);
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd d(box.lower.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      d(k) = rng.uniform(box.lower(k), box.upper(k));
    }
    s.samples.push_back(std::move(d));
  }
  return s;
}

ScenarioSet read_scenarios_csv(std::istream& in, std::string source) {
  ScenarioSet s;
  s.distribution = ExternalSource{std::move(source)};
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> values;
    std::stringstream row(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) {
          numeric = false;
        }
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::InvalidArguments,
                  "non-numeric scenario row at line " + std::to_string(lineno));
    }
    first = false;
    s.samples.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), values.size()));
  }
  validate_scenarios(s);
  return s;
}

ScenarioSet load_scenarios_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::InvalidArguments, "cannot open scenario file " + path);
  }
  return read_scenarios_csv(in, path);
}

AffinePolicy zero_policy(int vertex_count, int input_dim, int param_dim) {
  AffinePolicy p;
  p.gains.assign(vertex_count, Eigen::MatrixXd::Zero(input_dim, param_dim));
  p.offsets.assign(vertex_count, Eigen::VectorXd::Zero(input_dim));
  return p;
}

Eigen::MatrixXd policy_vertex_inputs(const AffinePolicy& p,
                                     const Eigen::VectorXd& delta) {
  if (delta.size() != p.param_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "policy expects parameters of length " +
                    std::to_string(p.param_dim()));
  }
  Eigen::MatrixXd u(p.input_dim(), p.vertex_count());
  for (int i = 0; i < p.vertex_count(); ++i) {
    u.col(i) = p.gains[i] * delta + p.offsets[i];
  }
  return u;
}

Eigen::VectorXd evaluate_policy(const AffinePolicy& p,
                                const Eigen::VectorXd& delta) {
  const Eigen::MatrixXd u = policy_vertex_inputs(p, delta);
  return Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
}

double policy_distance(const AffinePolicy& a, const AffinePolicy& b) {
  if (a.vertex_count() != b.vertex_count() || a.input_dim() != b.input_dim() ||
      a.param_dim() != b.param_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "policies differ in shape");
  }
  double worst = 0.0;
  for (int i = 0; i < a.vertex_count(); ++i) {
    if (a.param_dim() > 0) {
      worst = std::max(worst, (a.gains[i] - b.gains[i]).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, (a.offsets[i] - b.offsets[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

// FNV-1a over the raw bytes of the doubles (with -0.0 folded into 0.0).
class Hasher {
 public:
  void add(double v) {
    if (v == 0.0) v = 0.0;
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    add(bits);
  }
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h_ ^= (v >> (8 * b)) & 0xffu;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(const Eigen::MatrixXd& m) {
    add(static_cast<std::uint64_t>(m.rows()));
    add(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) add(m(i, j));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t fingerprint(const AffinePolicy& p) {
  Hasher h;
  h.add(static_cast<std::uint64_t>(p.vertex_count()));
  for (int i = 0; i < p.vertex_count(); ++i) {
    h.add(p.gains[i]);
    h.add(Eigen::MatrixXd(p.offsets[i]));
  }
  return h.value();
}

std::uint64_t fingerprint(const ScenarioSet& s) {
  Hasher h;
  h.add(static_cast<std::uint64_t>(s.samples.size()));
  for (const auto& d : s.samples) h.add(Eigen::MatrixXd(d));
  return h.value();
}

namespace {

void require_compatible(const SystemFamily& f, const Polytope& S,
                        const Polytope& U) {
  if (S.dim() != f.state_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state set has dimension " + std::to_string(S.dim()) +
                    ", system has " + std::to_string(f.state_dim()));
  }
  if (U.dim() != f.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input set has dimension " + std::to_string(U.dim()) +
                    ", system has " + std::to_string(f.input_dim()));
  }
}

// Per-sample data shared by all vertices: G = col(H, F B) and the image
// offsets F A x_i for every vertex.
struct SampleData {
  Eigen::MatrixXd G;        // (q+p) x m
  Eigen::MatrixXd FAX;      // p x N
  Eigen::VectorXd delta;
};

std::vector<SampleData> precompute(const SystemFamily& f, const Polytope& S,
                                   const Polytope& U, const ScenarioSet& sc) {
  require_compatible(f, S, U);
  validate_scenarios(sc);
  if (sc.param_dim() != f.param_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "samples have length " + std::to_string(sc.param_dim()) +
                    ", family expects " + std::to_string(f.param_dim()));
  }
  const int q = U.facet_count();
  const int p = S.facet_count();
  std::vector<SampleData> data;
  data.reserve(sc.samples.size());
  for (const auto& delta : sc.samples) {
    const SystemMatrices sys = f.instantiate(delta);
    SampleData d;
    d.G.resize(q + p, f.input_dim());
    d.G.topRows(q) = U.facets();
    d.G.bottomRows(p) = S.facets() * sys.B;
    d.FAX = S.facets() * sys.A * S.vertices();
    d.delta = delta;
    data.push_back(std::move(d));
  }
  return data;
}

// Right-hand side of sample j's rows for vertex i.
Eigen::VectorXd block_rhs(const SampleData& d, int q, int vertex) {
  Eigen::VectorXd l(d.G.rows());
  l.head(q).setOnes();
  l.tail(d.FAX.rows()) = Eigen::VectorXd::Ones(d.FAX.rows()) - d.FAX.col(vertex);
  return l;
}

struct VertexTrace {
  bool feasible = false;
  Eigen::VectorXd theta;  // [row-major C_i ; d_i] or just d_i
  std::vector<int> used;  // ascending
  InfeasibilityReport failure;
  int lp_solves = 0;
};

/**
 * Cutting-plane solve of one vertex block: start from the empty working
 * set, repeatedly add the violated rows of the `cuts_per_round` samples
 * with the largest violation (ties to the lower index), and re-solve the
 * 1-norm program on the working set. Every choice depends only on the
 * samples that are selected, so dropping a sample that never entered the
 * working set replays the identical sequence of programs.
 */
class VertexSolver {
 public:
  VertexSolver(const std::vector<SampleData>& data, int q, int vertex,
               bool affine, const ScenarioOptions& opt)
      : data_(data), q_(q), vertex_(vertex), affine_(affine), opt_(opt) {
    m_ = static_cast<int>(data.front().G.cols());
    ell_ = static_cast<int>(data.front().delta.size());
    ntheta_ = affine ? m_ * (ell_ + 1) : m_;
    rhs_.reserve(data.size());
    for (const auto& d : data) rhs_.push_back(block_rhs(d, q, vertex));
  }

  VertexTrace solve(const std::vector<int>& subset) const {
    VertexTrace trace;
    trace.theta = Eigen::VectorXd::Zero(ntheta_);
    const double cut_tol = opt_.lp.feas_tol;
    const int rows_per_sample = static_cast<int>(data_.front().G.rows());

    std::vector<std::pair<int, int>> work;  // (sample, row)
    std::vector<std::vector<char>> in_work(data_.size());
    std::vector<char> used(data_.size(), 0);

    for (int round = 0;; ++round) {
      if (round >= opt_.max_rounds) {
        throw Error(ErrorCode::NumericalBreakdown,
                    "cutting-plane loop did not settle for vertex " +
                        std::to_string(vertex_));
      }
      // (violation, sample, row) of each sample's worst unused row.
      std::vector<std::tuple<double, int, int>> violated;
      for (int j : subset) {
        const Eigen::VectorXd viol = data_[j].G * input(j, trace.theta) - rhs_[j];
        double worst = cut_tol;
        int worst_row = -1;
        for (int r = 0; r < rows_per_sample; ++r) {
          if (!in_work[j].empty() && in_work[j][r]) continue;
          if (viol(r) > worst) {
            worst = viol(r);
            worst_row = r;
          }
        }
        if (worst_row >= 0) violated.emplace_back(worst, j, worst_row);
      }
      if (violated.empty()) {
        trace.feasible = true;
        break;
      }
      std::sort(violated.begin(), violated.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
      });
      if (static_cast<int>(violated.size()) > opt_.cuts_per_round) {
        violated.resize(opt_.cuts_per_round);
      }
      const auto [worst_viol, worst_sample, worst_row] = violated.front();
      std::sort(violated.begin(), violated.end(), [](const auto& a, const auto& b) {
        return std::get<1>(a) < std::get<1>(b);
      });
      for (const auto& [v, j, r0] : violated) {
        const Eigen::VectorXd viol = data_[j].G * input(j, trace.theta) - rhs_[j];
        if (in_work[j].empty()) in_work[j].assign(rows_per_sample, 0);
        used[j] = 1;
        for (int r = 0; r < rows_per_sample; ++r) {
          if (!in_work[j][r] && viol(r) > cut_tol) {
            in_work[j][r] = 1;
            work.emplace_back(j, r);
          }
        }
      }

      const LpOutcome out = solve_working_set(work);
      ++trace.lp_solves;
      if (!out.optimal()) {
        trace.failure.sample = worst_sample;
        trace.failure.vertex = vertex_;
        trace.failure.row = worst_row;
        trace.failure.violation = worst_viol;
        std::ostringstream msg;
        msg << "no admissible input at vertex " << vertex_ << " for sample "
            << worst_sample << " ("
            << (worst_row < q_ ? "input-set row " : "state-set row ")
            << (worst_row < q_ ? worst_row : worst_row - q_) << ", violated by "
            << worst_viol << ")";
        trace.failure.message = msg.str();
        break;
      }
      trace.theta = out.solution.head(ntheta_) - out.solution.tail(ntheta_);
    }
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (used[j]) trace.used.push_back(static_cast<int>(j));
    }
    return trace;
  }

  void unpack(const Eigen::VectorXd& theta, Eigen::MatrixXd& gain,
              Eigen::VectorXd& offset) const {
    gain = Eigen::MatrixXd::Zero(m_, ell_);
    if (affine_) {
      for (int a = 0; a < m_; ++a) gain.row(a) = theta.segment(a * ell_, ell_).transpose();
      offset = theta.tail(m_);
    } else {
      offset = theta;
    }
  }

 private:
  Eigen::VectorXd input(int j, const Eigen::VectorXd& theta) const {
    if (!affine_) return theta;
    Eigen::VectorXd u = theta.tail(m_);
    for (int a = 0; a < m_; ++a) u(a) += theta.segment(a * ell_, ell_).dot(data_[j].delta);
    return u;
  }

  // Row of the program in theta for constraint (j, r).
  Eigen::RowVectorXd row(int j, int r) const {
    Eigen::RowVectorXd out(ntheta_);
    const auto g = data_[j].G.row(r);
    if (affine_) {
      for (int a = 0; a < m_; ++a) {
        out.segment(a * ell_, ell_) = g(a) * data_[j].delta.transpose();
      }
      out.tail(m_) = g;
    } else {
      out = g;
    }
    return out;
  }

  LpOutcome solve_working_set(const std::vector<std::pair<int, int>>& work) const {
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Ones(2 * ntheta_);
    lp.lower = Eigen::VectorXd::Zero(2 * ntheta_);
    lp.A_in.resize(work.size(), 2 * ntheta_);
    lp.b_in.resize(work.size());
    for (std::size_t k = 0; k < work.size(); ++k) {
      const auto [j, r] = work[k];
      const Eigen::RowVectorXd a = row(j, r);
      lp.A_in.row(k).head(ntheta_) = a;
      lp.A_in.row(k).tail(ntheta_) = -a;
      lp.b_in(k) = rhs_[j](r);
    }
    return cinv::solve(lp, opt_.lp);
  }

  const std::vector<SampleData>& data_;
  int q_;
  int vertex_;
  bool affine_;
  const ScenarioOptions& opt_;
  int m_ = 0;
  int ell_ = 0;
  int ntheta_ = 0;
  std::vector<Eigen::VectorXd> rhs_;
};

std::vector<int> all_indices(int K) {
  std::vector<int> idx(K);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void check_subset(const std::vector<int>& subset, int K) {
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] < 0 || subset[k] >= K || (k > 0 && subset[k] <= subset[k - 1])) {
      throw Error(ErrorCode::InvalidArguments,
                  "subset must be strictly ascending sample indices");
    }
  }
}

}  // namespace

std::vector<VertexConstraintBlock> assemble_vertex_constraints(
    const SystemFamily& f, const Polytope& S, const Polytope& U,
    const Eigen::VectorXd& delta) {
  require_compatible(f, S, U);
  const SystemMatrices sys = f.instantiate(delta);
  const int q = U.facet_count();
  const int p = S.facet_count();
  const Eigen::MatrixXd FB = S.facets() * sys.B;
  const Eigen::MatrixXd FAX = S.facets() * sys.A * S.vertices();
  std::vector<VertexConstraintBlock> blocks(S.vertex_count());
  for (int i = 0; i < S.vertex_count(); ++i) {
    auto& b = blocks[i];
    b.input_rows = q;
    b.G.resize(q + p, f.input_dim());
    b.G.topRows(q) = U.facets();
    b.G.bottomRows(p) = FB;
    b.l.resize(q + p);
    b.l.head(q).setOnes();
    b.l.tail(p) = Eigen::VectorXd::Ones(p) - FAX.col(i);
  }
  return blocks;
}

bool is_admissible(const SystemFamily& f, const Polytope& S, const Polytope& U,
                   const Eigen::VectorXd& delta, const Eigen::VectorXd& stacked_u,
                   double tol) {
  require_compatible(f, S, U);
  const int m = f.input_dim();
  const int N = S.vertex_count();
  if (stacked_u.size() != m * N) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(m * N) + " stacked inputs, got " +
                    std::to_string(stacked_u.size()));
  }
  const SystemMatrices sys = f.instantiate(delta);
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd u = stacked_u.segment(i * m, m);
    if (!contains(U, u, tol)) return false;
    if (!contains(S, sys.A * S.vertex(i) + sys.B * u, tol)) return false;
  }
  return true;
}

PolicySolution solve_affine_policy(const SystemFamily& f, const Polytope& S,
                                   const Polytope& U, const ScenarioSet& scenarios,
                                   const std::vector<int>& subset,
                                   const ScenarioOptions& options) {
  const auto data = precompute(f, S, U, scenarios);
  check_subset(subset, scenarios.size());
  PolicySolution sol;
  AffinePolicy policy;
  for (int i = 0; i < S.vertex_count(); ++i) {
    VertexSolver solver(data, U.facet_count(), i, /*affine=*/true, options);
    VertexTrace t = solver.solve(subset);
    sol.lp_solves += t.lp_solves;
    if (!t.feasible) {
      sol.infeasibility = t.failure;
      return sol;
    }
    Eigen::MatrixXd gain;
    Eigen::VectorXd offset;
    solver.unpack(t.theta, gain, offset);
    policy.gains.push_back(std::move(gain));
    policy.offsets.push_back(std::move(offset));
    sol.active_samples.push_back(std::move(t.used));
  }
  policy.scenario_fingerprint = fingerprint(scenarios);
  sol.policy = std::move(policy);
  return sol;
}

PolicySolution solve_affine_policy(const SystemFamily& f, const Polytope& S,
                                   const Polytope& U, const ScenarioSet& scenarios,
                                   const ScenarioOptions& options) {
  return solve_affine_policy(f, S, U, scenarios, all_indices(scenarios.size()),
                             options);
}

ConstantInputSolution solve_constant_input(const SystemFamily& f,
                                           const Polytope& S, const Polytope& U,
                                           const ScenarioSet& scenarios,
                                           const ScenarioOptions& options) {
  const auto data = precompute(f, S, U, scenarios);
  const auto subset = all_indices(scenarios.size());
  ConstantInputSolution sol;
  Eigen::MatrixXd inputs(f.input_dim(), S.vertex_count());
  for (int i = 0; i < S.vertex_count(); ++i) {
    VertexSolver solver(data, U.facet_count(), i, /*affine=*/false, options);
    const VertexTrace t = solver.solve(subset);
    if (!t.feasible) {
      sol.infeasibility = t.failure;
      return sol;
    }
    inputs.col(i) = t.theta;
  }
  sol.inputs = std::move(inputs);
  return sol;
}

SupportSubsample greedy_support_subsample(const SystemFamily& f,
                                          const Polytope& S, const Polytope& U,
                                          const ScenarioSet& scenarios,
                                          const ScenarioOptions& options) {
  const auto data = precompute(f, S, U, scenarios);
  const int K = scenarios.size();
  const int N = S.vertex_count();

  std::vector<VertexSolver> solvers;
  solvers.reserve(N);
  for (int i = 0; i < N; ++i) {
    solvers.emplace_back(data, U.facet_count(), i, /*affine=*/true, options);
  }

  std::vector<int> retained = all_indices(K);
  std::vector<VertexTrace> full(N);
  for (int i = 0; i < N; ++i) {
    full[i] = solvers[i].solve(retained);
    if (!full[i].feasible) {
      throw Error(ErrorCode::InvalidArguments,
                  "support search needs a feasible full-sample program: " +
                      full[i].failure.message);
    }
  }
  std::vector<VertexTrace> current = full;

  SupportSubsample result;
  for (int j = 0; j < K; ++j) {
    std::vector<int> affected;
    for (int i = 0; i < N; ++i) {
      if (options.exhaustive_greedy ||
          std::binary_search(current[i].used.begin(), current[i].used.end(), j)) {
        affected.push_back(i);
      }
    }
    std::vector<int> tentative;
    tentative.reserve(retained.size());
    for (int k : retained) {
      if (k != j) tentative.push_back(k);
    }
    if (affected.empty()) {
      retained = std::move(tentative);
      continue;
    }

    std::vector<VertexTrace> trial;
    bool same = true;
    for (int i : affected) {
      VertexTrace t = solvers[i].solve(tentative);
      ++result.resolves;
      if (!t.feasible) {
        throw Error(ErrorCode::InfeasibleOnSubsample,
                    "removing sample " + std::to_string(j) +
                        " made vertex " + std::to_string(i) + " infeasible");
      }
      if ((t.theta - full[i].theta).cwiseAbs().maxCoeff() > options.solution_tol) {
        same = false;
        break;
      }
      trial.push_back(std::move(t));
    }
    if (same) {
      for (std::size_t k = 0; k < affected.size(); ++k) {
        current[affected[k]] = std::move(trial[k]);
      }
      retained = std::move(tentative);
    }
  }

  AffinePolicy policy;
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd gain;
    Eigen::VectorXd offset;
    solvers[i].unpack(full[i].theta, gain, offset);
    policy.gains.push_back(std::move(gain));
    policy.offsets.push_back(std::move(offset));
  }
  policy.scenario_fingerprint = fingerprint(scenarios);
  result.policy = std::move(policy);
  result.indices = std::move(retained);
  return result;
}

}  // namespace cinv
