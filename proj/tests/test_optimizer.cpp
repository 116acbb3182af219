#include <gtest/gtest.h>

#include "expressive/optimizer.hpp"
#include "expressive/task_file.hpp"
#include "support.hpp"

namespace expressive {
namespace {

using testing::kPi;
using testing::vec;

CostSpec spec_for(CostKind kind, MetricKind metric, const KinematicChain& chain) {
  CostSpec s;
  s.cost_kind = kind;
  s.metric = {metric, 3};
  s.body_points = CostSpec::default_body_points(kind, chain);
  return s;
}

KinematicChain arm3() {
  return KinematicChain(false, {0.5, 0.4, 0.25}, {{-2.5, 2.5}, {-2.5, 2.5}, {-2.5, 2.5}});
}

Task open_task(const Pose& xf, const Pose& xd, int dof) {
  Task t;
  t.name = "open";
  t.q_s = Configuration::Zero(dof);
  t.x_f = xf;
  t.x_d = xd;
  return t;
}

TEST(SolveOptions, Validation) {
  SolveOptions o;
  EXPECT_NO_THROW(o.validate());
  o.T = 1;
  EXPECT_THROW(o.validate(), Error);
  o = SolveOptions{};
  o.gradient_tolerance = 0.0;
  EXPECT_THROW(o.validate(), Error);
}

TEST(SolveAttempt, DegenerateTaskStaysConstant) {
  const auto chain = arm3();
  const Task task = open_task(Pose(0.6, 0.3), Pose(0.6, 0.3), chain.dof());
  for (auto kind : {CostKind::kConfiguration, CostKind::kEmulateEndEffector}) {
    for (auto metric : {MetricKind::kL2, MetricKind::kDot, MetricKind::kProj}) {
      const auto spec = spec_for(kind, metric, chain);
      const auto r = solve_attempt(chain, task, spec, SolveOptions{});
      ASSERT_TRUE(r.converged);
      for (const auto& w : r.trajectory) {
        EXPECT_LT((w - r.trajectory.front()).norm(), 1e-6);
      }
      EXPECT_NEAR(r.objective, spec.alpha, 1e-9);
    }
  }
}

TEST(SolveAttempt, UnreachableFailurePose) {
  const auto chain = arm3();
  const Task task = open_task(Pose(3.0, 0.0), Pose(3.1, 0.0), chain.dof());
  try {
    solve_attempt(chain, task, spec_for(CostKind::kEmulateEndEffector, MetricKind::kL2, chain),
                  SolveOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachableTarget);
  }
}

TEST(SolveAttempt, FeasibleOnLift) {
  const auto b = testing::bundled("lift");
  const auto r = solve_attempt(b.chain, b.task, b.cost, b.solve);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.trajectory.size(), static_cast<std::size_t>(b.solve.T + 1));
  for (const auto& w : r.trajectory) {
    EXPECT_LE(detail::ee_residual(b.chain, w, b.task), 1e-4);
    EXPECT_GE(signed_distance(b.task.obstacles, b.chain, w), -1e-6);
    EXPECT_TRUE(b.chain.within_limits(w));
  }
  EXPECT_LE(r.constraint_residual, b.solve.constraint_tolerance);
  // Elbow lifts toward x_d.
  const Eigen::Vector2d up = b.task.x_d.position - b.task.x_f.position;
  const Eigen::Vector2d elbow = body_position(b.chain, r.trajectory.back(), BodyPoint::kElbow) -
                                body_position(b.chain, r.trajectory.front(), BodyPoint::kElbow);
  EXPECT_GT(elbow.dot(up), 0.0);
}

TEST(SolveAttempt, OrientationConstraintHeld) {
  const auto chain = KinematicChain(true, {0.5, 0.4, 0.3},
                                    {{-0.5, 0.5}, {-0.5, 0.5}, {-2.5, 2.5}, {-2.5, 2.5}, {-2.5, 2.5}});
  Task task = open_task(Pose(0.9, 0.1, 0.0), Pose(0.9, 0.3, 0.0), chain.dof());
  task.constrain_orientation = true;
  const auto r = solve_attempt(chain, task, spec_for(CostKind::kEmulateEndEffector, MetricKind::kProj, chain),
                               SolveOptions{});
  ASSERT_TRUE(r.converged);
  for (const auto& w : r.trajectory) {
    const Pose ee = forward_kinematics(chain, w, BodyPoint::kEndEffector);
    EXPECT_LT(std::abs(normalize_angle(ee.orientation)), 1e-4);
  }
}

TEST(SolveAttempt, Deterministic) {
  const auto b = testing::bundled("push");
  const auto r1 = solve_attempt(b.chain, b.task, b.cost, b.solve);
  const auto r2 = solve_attempt(b.chain, b.task, b.cost, b.solve);
  EXPECT_EQ(r1.objective, r2.objective);
  EXPECT_EQ(r1.seed_index, r2.seed_index);
  ASSERT_EQ(r1.trajectory.size(), r2.trajectory.size());
  for (std::size_t i = 0; i < r1.trajectory.size(); ++i) {
    EXPECT_EQ(r1.trajectory[i], r2.trajectory[i]);
  }
}

TEST(DesiredConfiguration, ExplicitQdVerbatim) {
  const auto chain = testing::unit_arm();
  Task task = open_task(Pose(1, 1), Pose(3, 3), 2);  // x_d unreachable: IK must be skipped
  task.q_d = vec({0.25, -0.5});
  EXPECT_EQ(desired_configuration(chain, task, vec({0, kPi / 2})), *task.q_d);
}

TEST(DesiredConfiguration, BoundaryAndBranches) {
  const auto chain = testing::unit_arm();
  Task task = open_task(Pose(1, 1), Pose(2, 0), 2);
  EXPECT_LT(desired_configuration(chain, task, vec({0.3, 0.3})).norm(), 1e-6);
  task.x_d = Pose(0, 1.5);
  const Configuration ref = vec({1.5, 1.0});
  const Configuration q = desired_configuration(chain, task, ref);
  for (const auto& s : ik_solutions(chain, task.x_d)) {
    EXPECT_LE((q - ref).squaredNorm(), (s - ref).squaredNorm());
  }
}

TEST(Minimizer, PenalizedObjectiveIsMonotone) {
  const auto b = testing::bundled("push");
  for (auto metric : {MetricKind::kL2, MetricKind::kDot, MetricKind::kProj}) {
    const auto spec = spec_for(CostKind::kEmulateEndEffector, metric, b.chain);
    const Configuration xi0 = ik_solutions(b.chain, b.task.x_f).front();
    CostContext ctx{xi0, std::nullopt, b.task.x_f, b.task.x_d, true};
    detail::AttemptProblem problem(b.chain, b.task, spec, b.solve, ctx);
    // A perturbed start so proj has a nonzero gradient.
    Eigen::MatrixXd x(b.solve.T, b.chain.dof());
    for (int t = 0; t < b.solve.T; ++t) {
      x.row(t) = (xi0 + 0.01 * (t + 1) * Configuration::Ones(b.chain.dof())).transpose();
    }
    for (double mu : {10.0, 1000.0, 1e6}) {
      problem.penalty_weight = mu;
      std::vector<double> history;
      x = detail::minimize_penalized(problem, problem.clamp(x), 300, 1e-9, &history);
      ASSERT_GE(history.size(), 2u);
      for (std::size_t i = 1; i < history.size(); ++i) {
        EXPECT_LE(history[i], history[i - 1]) << "step " << i << " at mu " << mu;
      }
    }
  }
}

TEST(Minimizer, PenaltyGradientMatchesFiniteDifferences) {
  const auto b = testing::bundled("lift");
  const auto spec = spec_for(CostKind::kEmulateEndEffector, MetricKind::kProj, b.chain);
  const Configuration xi0 = ik_solutions(b.chain, b.task.x_f).front();
  CostContext ctx{xi0, std::nullopt, b.task.x_f, b.task.x_d, true};
  detail::AttemptProblem problem(b.chain, b.task, spec, b.solve, ctx);
  problem.penalty_weight = 50.0;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x(b.solve.T, b.chain.dof());
    for (int t = 0; t < b.solve.T; ++t) {
      x.row(t) = (xi0 + 0.05 * testing::random_vector(b.chain.dof(), rng)).transpose();
    }
    Eigen::MatrixXd grad;
    problem.evaluate(x, &grad);
    const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    const Eigen::VectorXd numeric = testing::finite_difference(
        [&](const Eigen::VectorXd& v) {
          const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(v.data(), x.rows(), x.cols());
          return problem.evaluate(m, nullptr);
        },
        flat);
    const Eigen::VectorXd analytic = Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
    EXPECT_LT(testing::relative_error(analytic, numeric), 1e-5);
  }
}

TEST(GridSearch, DefaultsAreThePublishedGrid) {
  EXPECT_EQ(kDefaultLambdaGrid, (std::vector<double>{10, 20, 40, 80, 160}));
  EXPECT_EQ(kDefaultAlphaGrid, (std::vector<double>{0, 0.3, 0.6, 1.0, 2.0}));
}

TEST(GridSearch, SingletonEqualsDirectSolve) {
  const auto b = testing::bundled("pull");
  const std::vector<double> l = {b.cost.lambda}, a = {b.cost.alpha};
  const auto grid = grid_search(b.chain, b.task, b.cost, l, a, b.solve);
  ASSERT_EQ(grid.cells.size(), 1u);
  const auto direct = solve_attempt(b.chain, b.task, b.cost, b.solve);
  EXPECT_EQ(grid.best_cell().result.objective, direct.objective);
  EXPECT_THROW(grid_search(b.chain, b.task, b.cost, std::vector<double>{}, a, b.solve), Error);
}

TEST(GridSearch, RankingDeterministicAndBest) {
  const auto b = testing::bundled("pull_down");
  const std::vector<double> l = {10, 40}, a = {0.0, 0.6};
  const auto g1 = grid_search(b.chain, b.task, b.cost, l, a, b.solve);
  const auto g2 = grid_search(b.chain, b.task, b.cost, l, a, b.solve);
  EXPECT_EQ(g1.best, g2.best);
  ASSERT_EQ(g1.cells.size(), 4u);
  EXPECT_EQ(g1.cells[1].lambda, 10.0);
  EXPECT_EQ(g1.cells[1].alpha, 0.6);
  for (const auto& c : g1.cells) {
    if (c.result.converged) EXPECT_LE(g1.best_cell().result.objective, c.result.objective);
  }
}

// Larger lambda down-weights smoothness, so the similarity term cannot get worse.
TEST(OptimizerInvariant, SimilarityNonIncreasingInLambda) {
  auto b = testing::bundled("lift");
  b.cost = spec_for(CostKind::kEmulateEndEffector, MetricKind::kL2, b.chain);
  b.cost.alpha = 0.3;
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : kDefaultLambdaGrid) {
    b.cost.lambda = lambda;
    const auto r = solve_attempt(b.chain, b.task, b.cost, b.solve);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.similarity_cost, previous + 1e-6) << "lambda " << lambda;
    previous = r.similarity_cost;
  }
}

}  // namespace
}  // namespace expressive
