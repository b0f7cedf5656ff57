#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cinv/scenario.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

namespace cinv {
namespace {

using testing::explicit_scenarios;
using testing::scalar_scenarios;
using testing::single_edge_family;
using testing::unit_box;

SystemFamily constant_family(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  AffineModel m;
  m.A0 = A;
  m.B0 = B;
  m.Ak = {Eigen::MatrixXd::Zero(A.rows(), A.cols())};
  m.Bk = {Eigen::MatrixXd::Zero(B.rows(), B.cols())};
  return make_affine_family(std::move(m));
}

// Input map u = M theta for theta = (row-major C, d).
Eigen::MatrixXd input_map(const Eigen::VectorXd& delta, int m) {
  const int ell = static_cast<int>(delta.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m * ell + m);
  for (int r = 0; r < m; ++r) {
    M.block(r, r * ell, 1, ell) = delta.transpose();
    M(r, m * ell + r) = 1.0;
  }
  return M;
}

// Minimal 1-norm of (C_i, d_i) for one vertex by basic-solution enumeration
// over the epigraph form (theta, t) with |theta| <= t.
testing::OracleResult vertex_oracle(const SystemFamily& f, const Polytope& S,
                                    const Polytope& U, const ScenarioSet& sc, int vertex) {
  const int m = f.input_dim();
  const int nt = m * f.param_dim() + m;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (const auto& delta : sc.samples) {
    const auto block = assemble_vertex_constraints(f, S, U, delta)[vertex];
    const Eigen::MatrixXd GM = block.G * input_map(delta, m);
    for (int r = 0; r < GM.rows(); ++r) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * nt);
      row.head(nt) = GM.row(r);
      rows.push_back(row);
      rhs.push_back(block.l(r));
    }
  }
  for (int k = 0; k < nt; ++k) {
    for (double s : {1.0, -1.0}) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * nt);
      row(k) = s;
      row(nt + k) = -1.0;
      rows.push_back(row);
      rhs.push_back(0.0);
    }
  }
  Eigen::MatrixXd A(rows.size(), 2 * nt);
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(r) = rows[r];
    b(r) = rhs[r];
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * nt);
  c.tail(nt).setOnes();
  return testing::enumerate_lp(c, A, b);
}

double vertex_norm(const AffinePolicy& p, int i) {
  return p.gains[i].cwiseAbs().sum() + p.offsets[i].cwiseAbs().sum();
}

TEST(AssembleVertexConstraints, SingleEdgeByHand) {
  const SystemFamily f = single_edge_family();
  const Polytope S = unit_box(1);
  const auto blocks =
      assemble_vertex_constraints(f, S, unit_box(1), Eigen::VectorXd::Constant(1, 0.5));
  ASSERT_EQ(blocks.size(), 2u);
  // Vertex 0 is x = 1: input rows +-u <= 1, image rows +-0.5 u <= 1 -+ 0.5.
  const auto& b = blocks[0];
  EXPECT_EQ(S.vertex(0)(0), 1.0);
  EXPECT_EQ(b.input_rows, 2);
  Eigen::Vector4d G(1, -1, 0.5, -0.5);
  Eigen::Vector4d l(1, 1, 0.5, 1.5);
  EXPECT_EQ(Eigen::VectorXd(b.G.col(0)), Eigen::VectorXd(G));
  EXPECT_EQ(b.l, Eigen::VectorXd(l));
}

TEST(AssembleVertexConstraints, ZeroDynamics) {
  const SystemFamily f = constant_family(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
  const auto blocks =
      assemble_vertex_constraints(f, unit_box(2), unit_box(2), Eigen::VectorXd::Zero(1));
  for (const auto& b : blocks) {
    EXPECT_EQ(b.l, Eigen::VectorXd::Ones(8));
    EXPECT_EQ(b.G.topRows(4), b.G.bottomRows(4));
  }
}

TEST(SolveAffinePolicy, ZeroDynamicsGivesZeroPolicy) {
  const SystemFamily f = constant_family(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
  const ScenarioSet sc = scalar_scenarios({0.1, 0.7, -0.3});
  const PolicySolution sol = solve_affine_policy(f, unit_box(2), unit_box(2), sc);
  ASSERT_TRUE(sol.feasible());
  EXPECT_EQ(policy_distance(*sol.policy, zero_policy(4, 2, 1)), 0.0);
  EXPECT_EQ(sol.policy->scenario_fingerprint, fingerprint(sc));

  const ConstantInputSolution base = solve_constant_input(f, unit_box(2), unit_box(2), sc);
  ASSERT_TRUE(base.feasible());
  EXPECT_EQ(*base.inputs, Eigen::MatrixXd::Zero(2, 4));
}

TEST(SolveAffinePolicy, UncontrollableIsInfeasible) {
  const SystemFamily f =
      constant_family(2.0 * Eigen::Matrix2d::Identity(), Eigen::MatrixXd::Zero(2, 1));
  const ScenarioSet sc = scalar_scenarios({0.0, 1.0});
  const PolicySolution sol = solve_affine_policy(f, unit_box(2), unit_box(1), sc);
  ASSERT_FALSE(sol.feasible());
  ASSERT_TRUE(sol.infeasibility.has_value());
  EXPECT_EQ(sol.infeasibility->vertex, 0);
  EXPECT_EQ(sol.infeasibility->sample, 0);
  EXPECT_GE(sol.infeasibility->row, 1);  // an image row, not an input row
  EXPECT_GT(sol.infeasibility->violation, 0.0);
  EXPECT_FALSE(sol.infeasibility->message.empty());
  EXPECT_FALSE(solve_constant_input(f, unit_box(2), unit_box(1), sc).feasible());
  EXPECT_THROW(greedy_support_subsample(f, unit_box(2), unit_box(1), sc), Error);
}

TEST(SolveAffinePolicy, SingleEdgeThreeSamplesMatchesOracle) {
  const SystemFamily f = single_edge_family();
  const Polytope S = unit_box(1);
  const Polytope U = unit_box(1);
  const ScenarioSet sc = scalar_scenarios({0.4, 0.5, 0.6});
  const PolicySolution sol = solve_affine_policy(f, S, U, sc);
  ASSERT_TRUE(sol.feasible());
  for (int i = 0; i < S.vertex_count(); ++i) {
    const auto oracle = vertex_oracle(f, S, U, sc, i);
    ASSERT_EQ(oracle.status, testing::OracleResult::Optimal);
    EXPECT_NEAR(vertex_norm(*sol.policy, i), oracle.objective, 1e-9);
  }
  // All 3 x 2 vertex inclusions by direct substitution.
  for (const auto& delta : sc.samples) {
    const double w = delta(0);
    const Eigen::MatrixXd u = policy_vertex_inputs(*sol.policy, delta);
    for (int i = 0; i < 2; ++i) {
      const double next = (1.0 - w) * S.vertex(i)(0) + w * u(0, i);
      EXPECT_LE(std::abs(next), 1.0 + 1e-9);
      EXPECT_LE(std::abs(u(0, i)), 1.0 + 1e-9);
    }
  }
  const ConstantInputSolution base = solve_constant_input(f, S, U, sc);
  EXPECT_TRUE(base.feasible());
}

// x+ = delta x + u on [-1,1], samples 1.2, 1.5, 1.8: by hand the vertex
// x = 1 needs C * 1.8 + d <= -0.8, so the 1-norm optimum is C = -4/9,
// d = 0, and symmetrically C = 4/9 at x = -1. Only delta = 1.8 binds.
SystemFamily drift_family() {
  AffineModel m;
  m.A0 = Eigen::MatrixXd::Zero(1, 1);
  m.Ak = {Eigen::MatrixXd::Ones(1, 1)};
  m.B0 = Eigen::MatrixXd::Ones(1, 1);
  m.Bk = {Eigen::MatrixXd::Zero(1, 1)};
  return make_affine_family(std::move(m));
}

TEST(SolveAffinePolicy, HandDerivedDriftPolicy) {
  const ScenarioSet sc = scalar_scenarios({1.2, 1.5, 1.8});
  const PolicySolution sol = solve_affine_policy(drift_family(), unit_box(1), unit_box(1), sc);
  ASSERT_TRUE(sol.feasible());
  EXPECT_NEAR(sol.policy->gains[0](0, 0), -4.0 / 9.0, 1e-9);
  EXPECT_NEAR(sol.policy->offsets[0](0), 0.0, 1e-9);
  EXPECT_NEAR(sol.policy->gains[1](0, 0), 4.0 / 9.0, 1e-9);
  EXPECT_NEAR(sol.policy->offsets[1](0), 0.0, 1e-9);
}

TEST(GreedySupport, ImpliedSamplesAreDiscarded) {
  const SystemFamily f = drift_family();
  const ScenarioSet sc = scalar_scenarios({1.2, 1.5, 1.8});

  // Containment by LP: over the (C, d) region cut out by the samples 1.2 and
  // 1.8 at vertex x = 1, the constraint of 1.5 never binds.
  LinearProgram lp;
  lp.A_in.resize(2, 2);
  lp.A_in << 1.2, 1.0, 1.8, 1.0;
  lp.b_in = Eigen::Vector2d(1.0 - 1.2, 1.0 - 1.8);
  lp.objective = -Eigen::Vector2d(1.5, 1.0);
  lp.lower = Eigen::Vector2d(-10, -10);
  lp.upper = Eigen::Vector2d(10, 10);
  const LpOutcome worst = solve(lp);
  ASSERT_TRUE(worst.optimal());
  EXPECT_LE(-worst.objective, 1.0 - 1.5 + 1e-9);

  const SupportSubsample s = greedy_support_subsample(f, unit_box(1), unit_box(1), sc);
  EXPECT_EQ(s.indices, std::vector<int>{2});
}

TEST(GreedySupport, DuplicatesCollapseToOne) {
  testing::Instance inst = [] {
    std::mt19937_64 rng(17);
    for (;;) {
      auto i = testing::random_affine_instance(2, 1, 2, 1, rng);
      if (solve_affine_policy(i.family, i.S, i.U, i.scenarios).feasible()) {
        const auto p = solve_affine_policy(i.family, i.S, i.U, i.scenarios).policy;
        if (policy_distance(*p, zero_policy(4, 1, 2)) > 1e-3) return i;
      }
    }
  }();
  const ScenarioSet dup = explicit_scenarios(
      std::vector<Eigen::VectorXd>(7, inst.scenarios.samples.front()));
  const SupportSubsample s = greedy_support_subsample(inst.family, inst.S, inst.U, dup);
  EXPECT_EQ(s.size(), 1);
  EXPECT_EQ(s.indices, std::vector<int>{6});
}

TEST(GreedySupport, SingleSample) {
  const SystemFamily f = single_edge_family();
  const SupportSubsample s =
      greedy_support_subsample(f, unit_box(1), unit_box(1), scalar_scenarios({0.5}));
  EXPECT_LE(s.size(), 1);
}

TEST(ScenarioSets, UniformSamplingIsReproducible) {
  UniformBox box{Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 2)};
  const ScenarioSet a = sample_uniform(box, 50, 9);
  const ScenarioSet b = sample_uniform(box, 50, 9);
  const ScenarioSet c = sample_uniform(box, 50, 10);
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_NE(fingerprint(a), fingerprint(c));
  for (const auto& s : a.samples) {
    EXPECT_TRUE((s.array() >= box.lower.array()).all());
    EXPECT_TRUE((s.array() <= box.upper.array()).all());
  }
  validate_scenarios(a);
  ScenarioSet bad = a;
  bad.samples[3] = Eigen::Vector2d(5, 0);
  EXPECT_THROW(validate_scenarios(bad), Error);
  EXPECT_THROW(sample_uniform(box, 0, 1), Error);
}

TEST(ScenarioSets, CsvRoundTrip) {
  std::istringstream in("w1,w2\n0.5,1.25\n-1e-3,4\n");
  const ScenarioSet s = read_scenarios_csv(in, "mem");
  ASSERT_EQ(s.size(), 2);
  EXPECT_EQ(s.samples[1], Eigen::Vector2d(-1e-3, 4));
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_scenarios_csv(ragged), Error);
}

TEST(Policy, EvaluateMatchesMatrixArithmetic) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    AffinePolicy p;
    for (int i = 0; i < 3; ++i) {
      p.gains.push_back(testing::random_matrix(2, 2, 1.0, rng));
      p.offsets.push_back(testing::random_matrix(2, 1, 1.0, rng));
    }
    const Eigen::VectorXd delta = testing::random_matrix(2, 1, 1.0, rng);
    const Eigen::VectorXd u = evaluate_policy(p, delta);
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 2; ++r) {
        const double expect = p.gains[i](r, 0) * delta(0) +
                              p.gains[i](r, 1) * delta(1) + p.offsets[i](r);
        EXPECT_NEAR(u(2 * i + r), expect, 1e-15);
      }
    }
    EXPECT_EQ(evaluate_policy(p, Eigen::Vector2d::Zero()).segment(2, 2),
              p.offsets[1]);
  }
  EXPECT_THROW(evaluate_policy(zero_policy(2, 1, 2), Eigen::Vector3d::Zero()), Error);
}

TEST(Admissibility, Examples) {
  const SystemFamily f = constant_family(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
  const Eigen::VectorXd d = Eigen::VectorXd::Zero(1);
  EXPECT_TRUE(is_admissible(f, unit_box(2), unit_box(2), d, Eigen::VectorXd::Zero(8)));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(8);
  u(5) = 1.5;
  EXPECT_FALSE(is_admissible(f, unit_box(2), unit_box(2), d, u));
  EXPECT_THROW(is_admissible(f, unit_box(2), unit_box(2), d, Eigen::VectorXd::Zero(3)),
               Error);
}

// Randomised instances: consistency at every training sample, objective
// optimality against enumeration, baseline dominance, order-invariant
// feasibility, support reproduction and shortcut/exhaustive agreement.
TEST(ScenarioProperties, RandomInstances) {
  std::mt19937_64 rng(99);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 2;
    auto inst = testing::random_affine_instance(n, 1, 1, 4, rng, 1.0, 0.3);
    const PolicySolution sol =
        solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
    const ConstantInputSolution base =
        solve_constant_input(inst.family, inst.S, inst.U, inst.scenarios);
    if (base.feasible()) {
      EXPECT_TRUE(sol.feasible()) << "trial " << trial;
    }

    std::vector<Eigen::VectorXd> shuffled = inst.scenarios.samples;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(solve_affine_policy(inst.family, inst.S, inst.U,
                                  explicit_scenarios(shuffled))
                  .feasible(),
              sol.feasible());

    for (int i = 0; i < inst.S.vertex_count(); ++i) {
      const auto oracle = vertex_oracle(inst.family, inst.S, inst.U, inst.scenarios, i);
      if (!sol.feasible()) {
        // Blocks are independent, so at least one vertex is infeasible.
        continue;
      }
      ASSERT_EQ(oracle.status, testing::OracleResult::Optimal);
      EXPECT_NEAR(vertex_norm(*sol.policy, i), oracle.objective, 1e-7);
    }
    if (!sol.feasible()) {
      bool some_infeasible = false;
      for (int i = 0; i < inst.S.vertex_count(); ++i) {
        some_infeasible |= vertex_oracle(inst.family, inst.S, inst.U, inst.scenarios, i)
                               .status == testing::OracleResult::Infeasible;
      }
      EXPECT_TRUE(some_infeasible);
      ++infeasible;
      continue;
    }
    ++feasible;
    for (const auto& delta : inst.scenarios.samples) {
      EXPECT_TRUE(is_admissible(inst.family, inst.S, inst.U, delta,
                                evaluate_policy(*sol.policy, delta), 1e-8));
    }

    ScenarioOptions exhaustive;
    exhaustive.exhaustive_greedy = true;
    const SupportSubsample fast =
        greedy_support_subsample(inst.family, inst.S, inst.U, inst.scenarios);
    const SupportSubsample slow =
        greedy_support_subsample(inst.family, inst.S, inst.U, inst.scenarios, exhaustive);
    EXPECT_EQ(fast.indices, slow.indices);
    const PolicySolution again =
        solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios, fast.indices);
    ASSERT_TRUE(again.feasible());
    EXPECT_LE(policy_distance(*again.policy, fast.policy), 1e-6);
  }
  EXPECT_GT(feasible, 5);
  EXPECT_GT(infeasible, 2);
}

TEST(ScenarioProperties, DeterministicAcrossRuns) {
  std::mt19937_64 rng(5);
  auto inst = testing::random_affine_instance(2, 2, 2, 40, rng, 0.8);
  const PolicySolution a = solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
  const PolicySolution b = solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
  ASSERT_EQ(a.feasible(), b.feasible());
  if (a.feasible()) {
    EXPECT_EQ(fingerprint(*a.policy), fingerprint(*b.policy));
  }
}

}  // namespace
}  // namespace cinv
