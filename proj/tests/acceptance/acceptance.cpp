// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cinv/certificate.hpp"
#include "cinv/closed_loop.hpp"
#include "cinv/config.hpp"
#include "cinv/feasibility.hpp"
#include "cinv/pipeline.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace {

using namespace cinv;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a = 0, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

Outcome epsilon_reproduction() {
  const double eps = epsilon_even_split(29, 600, 1e-6);
  const ScenarioSet sc = testing::scalar_scenarios(std::vector<double>(600, 1.0));
  AffinePolicy p = zero_policy(1, 1, 1);
  p.scenario_fingerprint = fingerprint(sc);
  const Certificate c = build_certificate(600, 29, 1e-6, p, sc);
  const bool pass = std::abs(eps - 0.2089) <= 5e-4 &&
                    std::abs(c.invariance_probability - 0.7911) <= 5e-4;
  return {pass, fmt("eps(29)=%.6f invariance_probability=%.6f", eps,
                    c.invariance_probability)};
}

Outcome summation_identity() {
  bool pass = true;
  double worst = 0.0;
  for (auto [K, beta] : {std::pair{600, 1e-6}, {50, 0.05}, {1000, 1e-3}}) {
    std::vector<double> terms;
    double top = -INFINITY;
    for (int h = 0; h < K; ++h) {
      terms.push_back(log_summation_term(h, K, beta));
      top = std::max(top, terms.back());
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - top);
    const double rel = std::abs(std::expm1(top + std::log(acc) - std::log(beta)));
    worst = std::max(worst, rel);
    pass &= rel <= 1e-9;
  }
  return {pass, fmt("worst relative error %.3e", worst)};
}

SystemFamily constant_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  AffineModel m;
  m.A0 = A;
  m.B0 = B;
  m.Ak = {Eigen::MatrixXd::Zero(A.rows(), A.cols())};
  m.Bk = {Eigen::MatrixXd::Zero(B.rows(), B.cols())};
  return make_affine_family(std::move(m));
}

Outcome minor_oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  int agree = 0, total = 0, feasible = 0;
  for (int trial = 0; trial < 240; ++trial) {
    const int n = 2 + trial % 2;
    const SystemFamily f = constant_family(testing::random_matrix(n, n, 1.0, rng),
                                           testing::random_matrix(n, 2, 1.0, rng));
    const Eigen::VectorXd d = Eigen::VectorXd::Zero(1);
    const Polytope S = testing::unit_box(n);
    const Polytope U = testing::unit_box(2);
    const bool minors = single_sample_iff(f, S, U, d).feasible;
    const bool lp = vertex_blocks_feasible(f, S, U, d);
    agree += minors == lp;
    feasible += lp;
    ++total;
  }
  return {agree == total && total >= 200,
          fmt("%.0f/%.0f verdicts agree (%.0f feasible)", agree, total, feasible)};
}

Outcome consistency_condition() {
  std::mt19937_64 rng(77);
  int feasible = 0, failures = 0, baseline_violations = 0, baseline_feasible = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int K = 20 + 45 * (trial % 5);  // up to 200
    const int n = 2 + trial % 2;
    auto inst = testing::random_affine_instance(n, 1 + trial % 2, 2, K, rng, 0.9, 0.2);
    const PolicySolution sol =
        solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
    const ConstantInputSolution base =
        solve_constant_input(inst.family, inst.S, inst.U, inst.scenarios);
    baseline_feasible += base.feasible();
    if (base.feasible() && !sol.feasible()) ++baseline_violations;
    if (!sol.feasible()) continue;
    ++feasible;
    for (const auto& delta : inst.scenarios.samples) {
      if (!is_admissible(inst.family, inst.S, inst.U, delta,
                         evaluate_policy(*sol.policy, delta), 1e-8)) {
        ++failures;
      }
    }
  }
  return {failures == 0 && baseline_violations == 0 && feasible > 0,
          fmt("%.0f feasible instances, %.0f admissibility failures, "
              "%.0f baseline-feasible, %.0f dominance violations",
              feasible, failures, baseline_feasible, baseline_violations)};
}

Outcome support_subsample_property() {
  std::mt19937_64 rng(5150);
  int instances = 0, reproduced = 0;
  double worst = 0.0;
  while (instances < 50) {
    auto inst = testing::random_affine_instance(2, 1 + instances % 2, 2, 30, rng, 0.9, 0.2);
    if (!solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios).feasible()) {
      continue;
    }
    ++instances;
    const SupportSubsample s =
        greedy_support_subsample(inst.family, inst.S, inst.U, inst.scenarios);
    const PolicySolution again =
        solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios, s.indices);
    if (!again.feasible()) continue;
    const double dist = policy_distance(*again.policy, s.policy);
    worst = std::max(worst, dist);
    reproduced += dist <= 1e-6;
  }

  // Duplicate samples: take a sample whose policy is non-trivial.
  int duplicate_size = -1;
  for (int tries = 0; tries < 100 && duplicate_size < 0; ++tries) {
    auto inst = testing::random_affine_instance(2, 1, 2, 1, rng, 1.0, 0.2);
    const auto sol = solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
    if (!sol.feasible() || policy_distance(*sol.policy, zero_policy(4, 1, 2)) < 1e-6) {
      continue;
    }
    const ScenarioSet dup = testing::explicit_scenarios(
        std::vector<Eigen::VectorXd>(25, inst.scenarios.samples.front()));
    duplicate_size = greedy_support_subsample(inst.family, inst.S, inst.U, dup).size();
  }
  return {reproduced == 50 && duplicate_size == 1,
          fmt("%.0f/50 reproduced (worst %.2e), duplicates collapse to s=%.0f",
              reproduced, worst, duplicate_size)};
}

struct NetworkRun {
  ProblemConfig config;
  CertifyResult result;
};

NetworkRun& network_run() {
  static NetworkRun run = [] {
    ProblemConfig config = load_config(std::string(CINV_CONFIG_DIR) + "/network6.json");
    CertifyOptions opt;
    opt.estimate_draws = 10000;
    CertifyResult result = run_certify(config, opt);
    return NetworkRun{std::move(config), std::move(result)};
  }();
  return run;
}

Outcome structural_replication() {
  NetworkRun& run = network_run();
  const nlohmann::json& r = run.result.report;
  const double rho = r["diagnostics"]["nominal_spectral_radius"].get<double>();
  if (run.result.exit_code != kCertified) {
    return {false, fmt("pipeline exit code %.0f, rho=%.4f", run.result.exit_code, rho)};
  }
  const int s = r["s_K"].get<int>();
  const double eps = r["epsilon"].get<double>();
  const double vhat = r["violation_estimate"]["rate"].get<double>();
  const bool pass = rho > 1.0 && s <= 60 && eps < 0.5 && vhat <= eps &&
                    r["consistency_failures"].get<int>() == 0;
  return {pass, fmt("rho=%.4f s_600=%.0f eps=%.4f Vhat=%.4f", rho, s, eps, vhat)};
}

Outcome closed_loop_invariance() {
  NetworkRun& run = network_run();
  if (!run.result.policy) return {false, "no certified policy"};
  const ProblemConfig& c = run.config;
  const auto interior = random_points_in(c.state_set, 100, c.options.init_seed);
  double worst = 0.0;
  int trajectories = 0;
  for (const auto& delta : c.scenarios.samples) {
    std::vector<Eigen::VectorXd> starts = interior;
    for (int v = 0; v < c.state_set.vertex_count(); ++v) {
      starts.push_back(c.state_set.vertex(v));
    }
    for (const auto& x0 : starts) {
      const Trajectory tr =
          simulate_closed_loop(c.family, delta, c.state_set, *run.result.policy, x0, 50);
      worst = std::max(worst, tr.max_gauge());
      ++trajectories;
    }
  }
  return {worst <= 1.0 + 1e-6,
          fmt("%.0f trajectories over %.0f samples, max gauge %.9f", trajectories,
              c.scenarios.size(), worst)};
}

Outcome geometry_duality() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  int points = 0, polytopes = 0;
  double worst = 0.0;
  while (points < 500) {
    const int n = 2 + polytopes % 3;
    const auto hull = testing::random_hull(n, 5 + 2 * n, rng);
    if (!hull) continue;
    const Polytope P = validate_polytope(hull->facets, hull->vertices);
    ++polytopes;
    for (int k = 0; k < 25; ++k) {
      Eigen::VectorXd x(n);
      for (int c = 0; c < n; ++c) x(c) = unit(rng);
      x *= scale(rng) / minkowski_gauge(P, x);
      const Eigen::VectorXd gamma = vertex_decompose(P, x);
      worst = std::max(worst, std::abs(gamma.sum() - minkowski_gauge(P, x)));
      ++points;
    }
  }
  return {worst <= 1e-6, fmt("%.0f points on %.0f polytopes, worst |1'gamma - psi| %.2e",
                             points, polytopes, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 epsilon reproduction", epsilon_reproduction},
      {"2 summation identity", summation_identity},
      {"3 minor-enumeration oracle equivalence", minor_oracle_equivalence},
      {"4 consistency condition", consistency_condition},
      {"5 support subsample property", support_subsample_property},
      {"6 six-node network replication", structural_replication},
      {"7 closed-loop invariance at training samples", closed_loop_invariance},
      {"8 geometry duality", geometry_duality},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", name.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
