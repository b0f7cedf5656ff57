#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cinv/certificate.hpp"
#include "cinv/closed_loop.hpp"
#include "support/instances.hpp"

namespace cinv {
namespace {

using testing::unit_box;

SystemFamily deadbeat_family() {
  AffineModel m;
  m.A0 = Eigen::Matrix2d::Zero();
  m.B0 = Eigen::Matrix2d::Identity();
  m.Ak = {Eigen::Matrix2d::Zero()};
  m.Bk = {Eigen::Matrix2d::Zero()};
  return make_affine_family(std::move(m));
}

TEST(VertexControlInput, Examples) {
  const Polytope box = unit_box(2);
  Eigen::MatrixXd inputs(1, 4);
  inputs << 0.3, -0.7, 0.1, 0.9;
  EXPECT_EQ(vertex_control_input(box, inputs, Eigen::Vector2d::Zero()),
            Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(vertex_control_input(box, inputs, box.vertex(0))(0), 0.3, 1e-12);
  // Midpoint of vertices 0 and 1 decomposes as (0.5, 0.5, 0, 0).
  const Eigen::Vector2d mid = 0.5 * (box.vertex(0) + box.vertex(1));
  EXPECT_NEAR(vertex_control_input(box, inputs, mid)(0), 0.5 * (0.3 - 0.7), 1e-12);
  EXPECT_THROW(vertex_control_input(box, inputs, Eigen::Vector2d(2, 0)), Error);
}

TEST(Simulate, DeadbeatReachesOrigin) {
  const SystemFamily f = deadbeat_family();
  const Polytope S = unit_box(2);
  const AffinePolicy p = zero_policy(4, 2, 1);
  const Eigen::Vector2d x0(0.5, -0.25);
  const Trajectory tr = simulate_closed_loop(f, Eigen::VectorXd::Zero(1), S, p, x0, 5);
  ASSERT_EQ(tr.states.cols(), 6);
  ASSERT_EQ(tr.inputs.cols(), 5);
  EXPECT_DOUBLE_EQ(tr.gauge(0), 0.5);
  for (int t = 1; t <= 5; ++t) {
    EXPECT_EQ(tr.states.col(t), Eigen::Vector2d::Zero());
    EXPECT_EQ(tr.gauge(t), 0.0);
  }
  EXPECT_FALSE(tr.first_exit.has_value());
  EXPECT_EQ(tr.policy_fingerprint, fingerprint(p));
  const Trajectory from_vertex =
      simulate_closed_loop(f, Eigen::VectorXd::Zero(1), S, p, S.vertex(2), 3);
  EXPECT_DOUBLE_EQ(from_vertex.gauge(0), 1.0);
  EXPECT_THROW(simulate_closed_loop(f, Eigen::VectorXd::Zero(1), S, p,
                                    Eigen::Vector2d(3, 0), 3),
               Error);
}

TEST(Simulate, SingleEdgeScalarRecursion) {
  const SystemFamily f = testing::single_edge_family();
  const Polytope S = unit_box(1);
  const ScenarioSet sc = testing::scalar_scenarios({0.4, 0.5, 0.6});
  const auto sol = solve_affine_policy(f, S, unit_box(1), sc);
  ASSERT_TRUE(sol.feasible());
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 0.5);
  const Trajectory tr = simulate_closed_loop(f, w, S, *sol.policy,
                                             Eigen::VectorXd::Constant(1, 0.8), 20);
  double x = 0.8;
  for (int t = 0; t < 20; ++t) {
    x = 0.5 * x + 0.5 * tr.inputs(0, t);
    EXPECT_NEAR(tr.states(0, t + 1), x, 1e-12);
    EXPECT_LE(tr.gauge(t + 1), tr.gauge(t) + 1e-12);
  }
}

TEST(Simulate, ExitIsRecorded) {
  AffineModel m;
  m.A0 = Eigen::MatrixXd::Constant(1, 1, 3.0);
  m.B0 = Eigen::MatrixXd::Zero(1, 1);
  m.Ak = {Eigen::MatrixXd::Zero(1, 1)};
  m.Bk = {Eigen::MatrixXd::Zero(1, 1)};
  const SystemFamily f = make_affine_family(std::move(m));
  const Trajectory tr = simulate_closed_loop(f, Eigen::VectorXd::Zero(1), unit_box(1),
                                             zero_policy(2, 1, 1),
                                             Eigen::VectorXd::Constant(1, 0.5), 4);
  ASSERT_TRUE(tr.first_exit.has_value());
  EXPECT_EQ(*tr.first_exit, 1);
  EXPECT_NEAR(tr.states(0, 4), 0.5 * 81, 1e-9);
  EXPECT_EQ(tr.inputs.row(0).tail(3), Eigen::RowVectorXd::Zero(3));
}

TEST(Simulate, CsvLayout) {
  const Trajectory tr = simulate_closed_loop(deadbeat_family(), Eigen::VectorXd::Zero(1),
                                             unit_box(2), zero_policy(4, 2, 1),
                                             Eigen::Vector2d(0.5, 0.5), 2);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x_1,x_2,u_1,u_2,gauge");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(last, "2,0,0,,,0");
}

TEST(EstimateViolation, Examples) {
  const SystemFamily f = testing::single_edge_family();
  const Polytope S = unit_box(1);
  const ScenarioSet sc = testing::scalar_scenarios({0.4, 0.5, 0.6});
  const AffinePolicy p = *solve_affine_policy(f, S, unit_box(1), sc).policy;
  const auto none = estimate_violation(f, S, unit_box(1), p, FiniteSupport{sc.samples},
                                       500, 3);
  EXPECT_EQ(none.rate, 0.0);
  EXPECT_EQ(none.failure_count, 0);

  // Huge input demand at the unit-box vertices fails for every parameter.
  AffinePolicy bad = zero_policy(2, 1, 1);
  bad.offsets[0](0) = 5.0;
  const auto all = estimate_violation(f, S, unit_box(1), bad,
                                      FiniteSupport{{Eigen::VectorXd::Constant(1, 0.5)}},
                                      50, 3, 1e-8, 10);
  EXPECT_EQ(all.rate, 1.0);
  EXPECT_EQ(all.failures.size(), 10u);
  EXPECT_EQ(all.standard_error, 0.0);

  TableModel t;
  t.A = {Eigen::MatrixXd::Ones(1, 1)};
  t.B = {Eigen::MatrixXd::Ones(1, 1)};
  try {
    estimate_violation(make_table_family(t), S, unit_box(1), p,
                       UniformBox{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)},
                       10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DistributionUnavailable);
  }
}

TEST(EstimateViolation, ReproducibleAndBoundedByCertificate) {
  const SystemFamily f = testing::single_edge_family();
  const Polytope S = unit_box(1);
  const Polytope U = unit_box(1);
  const UniformBox box{Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 0.6)};
  const ScenarioSet sc = sample_uniform(box, 200, 21);
  const SupportSubsample sup = greedy_support_subsample(f, S, U, sc);
  const Certificate c = build_certificate(200, sup.size(), 1e-6, sup.policy, sc);
  const auto a = estimate_violation(f, S, U, sup.policy, box, 10000, 77);
  const auto b = estimate_violation(f, S, U, sup.policy, box, 10000, 77);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_LE(a.rate, c.epsilon);
  EXPECT_EQ(a.draws, 10000);
}

// Certified vertex law at every training sample: gauge never exceeds 1
// from vertices or interior points, and one step from any interior point
// stays in S.
TEST(ClosedLoopProperties, InvarianceAtTrainingSamples) {
  std::mt19937_64 rng(12);
  int certified = 0;
  for (int trial = 0; trial < 20 && certified < 4; ++trial) {
    auto inst = testing::random_affine_instance(2, 1, 2, 15, rng, 1.0, 0.2);
    const auto sol = solve_affine_policy(inst.family, inst.S, inst.U, inst.scenarios);
    if (!sol.feasible()) continue;
    ++certified;
    const auto interior = random_points_in(inst.S, 30, 5);
    for (const auto& delta : inst.scenarios.samples) {
      EXPECT_EQ(estimate_violation(inst.family, inst.S, inst.U, *sol.policy,
                                   FiniteSupport{{delta}}, 5, 1)
                    .rate,
                0.0);
      for (int v = 0; v < inst.S.vertex_count(); ++v) {
        const Trajectory tr = simulate_closed_loop(inst.family, delta, inst.S,
                                                   *sol.policy, inst.S.vertex(v), 50);
        EXPECT_LE(tr.max_gauge(), 1.0 + 1e-6);
        EXPECT_FALSE(tr.first_exit.has_value());
      }
      for (const auto& x : interior) {
        const Trajectory tr =
            simulate_closed_loop(inst.family, delta, inst.S, *sol.policy, x, 1);
        EXPECT_LE(tr.gauge(1), 1.0 + 1e-6);
      }
    }
  }
  EXPECT_EQ(certified, 4);
}

TEST(RandomPoints, InsideAndReproducible) {
  const Polytope S = testing::six_node_state_set();
  const auto a = random_points_in(S, 100, 4);
  const auto b = random_points_in(S, 100, 4);
  ASSERT_EQ(a.size(), 100u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_TRUE(contains(S, a[k]));
    EXPECT_EQ(a[k], b[k]);
  }
}

}  // namespace
}  // namespace cinv
