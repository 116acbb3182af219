#include <gtest/gtest.h>

#include <random>

#include "expressive/costs.hpp"
#include "support.hpp"

namespace expressive {
namespace {

using testing::vec;

const DistanceMetric kL2{MetricKind::kL2, 1};
const DistanceMetric kDot{MetricKind::kDot, 1};
DistanceMetric proj(int k) { return {MetricKind::kProj, k}; }

// The projection metric written from its definition: -|v1||v2| (cos)^k with
// the sign-preserving power.
double proj_oracle(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2, int k) {
  const double n1 = v1.norm(), n2 = v2.norm();
  if (n1 <= 1e-12 || n2 <= 1e-12) return 0.0;
  const double c = v1.dot(v2) / (n1 * n2);
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= c;
  if (k % 2 == 0 && c < 0) p = -p;
  return -n1 * n2 * p;
}

TEST(Distance, Examples) {
  const Eigen::Vector2d x(1, 0), y(0, 1);
  EXPECT_EQ(distance(kL2, x, x), 0.0);
  EXPECT_EQ(distance(kDot, x, x), -1.0);
  for (int k : {1, 3, 5, 9}) {
    EXPECT_NEAR(distance(proj(k), x, y), 0.0, 1e-15);
    const Eigen::Vector2d v(0.3, -1.7);
    EXPECT_NEAR(distance(proj(k), v, v), -v.squaredNorm(), 1e-12);
  }
}

TEST(Distance, ProjMatchesDefinition) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v1 = testing::random_vector(3, rng), v2 = testing::random_vector(3, rng);
    for (int k : {1, 3, 5, 7}) {
      EXPECT_NEAR(distance(proj(k), v1, v2), proj_oracle(v1, v2, k), 1e-12);
    }
  }
}

TEST(Distance, ZeroVectorsGiveZero) {
  const Eigen::Vector2d z = Eigen::Vector2d::Zero(), v(1, 2);
  EXPECT_EQ(distance(proj(3), z, v), 0.0);
  EXPECT_EQ(distance(proj(3), v, z), 0.0);
  EXPECT_TRUE(distance_gradient(proj(3), z, v).d_v1.isZero());
}

TEST(Distance, DimensionMismatch) {
  EXPECT_THROW(distance(kL2, Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), Error);
}

TEST(DistanceMetric, Validation) {
  EXPECT_NO_THROW(proj(3).validate());
  EXPECT_THROW(proj(2).validate(), Error);
  EXPECT_THROW(proj(0).validate(), Error);
  try {
    proj(4).validate();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("odd"), std::string::npos);
  }
}

TEST(DistanceGradient, ClosedForms) {
  const auto g = distance_gradient(kL2, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0));
  EXPECT_EQ(g.d_v1, Eigen::Vector2d(2, 0));
  const Eigen::Vector2d v2(0.4, -0.9);
  EXPECT_EQ(distance_gradient(kDot, Eigen::Vector2d(3, 1), v2).d_v1, -v2);
}

TEST(DistanceGradient, ProjMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int k : {3, 9}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd v1 = testing::random_vector(2, rng);
      const Eigen::VectorXd v2 = testing::random_vector(2, rng);
      const auto g = distance_gradient(proj(k), v1, v2);
      const auto n1 = testing::finite_difference(
          [&](const Eigen::VectorXd& x) { return distance(proj(k), x, v2); }, v1);
      const auto n2 = testing::finite_difference(
          [&](const Eigen::VectorXd& x) { return distance(proj(k), v1, x); }, v2);
      EXPECT_LT(testing::relative_error(g.d_v1, n1), 1e-5);
      EXPECT_LT(testing::relative_error(g.d_v2, n2), 1e-5);
    }
  }
}

TEST(MetricInvariant, ProjScaleAndSignLaws) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(0.01, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v1 = testing::random_vector(2, rng), v2 = testing::random_vector(2, rng);
    const double s = scale(rng);
    for (int k : {1, 3, 5}) {
      const double d = distance(proj(k), v1, v2);
      EXPECT_NEAR(distance(proj(k), s * v1, v2), s * d, 1e-12 * std::max(1.0, std::abs(s * d)));
      const double c = v1.dot(v2);
      if (std::abs(c) > 1e-9) EXPECT_EQ(d < 0.0, c > 0.0);
    }
    EXPECT_GE(distance(kL2, v1, v2), 0.0);
  }
}

// Costs.

const std::vector<BodyPoint> kElbowOnly = {BodyPoint::kElbow};

TEST(CostCq, Examples) {
  const auto chain = KinematicChain(false, {1.0, 1.0}, {{-5, 5}, {-5, 5}});
  const Configuration xi0 = vec({0, 0}), xiT = vec({0.1, 0.2}), qd = vec({1, 2});
  EXPECT_EQ(cost_cq(chain, xi0, qd, qd, kL2), 0.0);
  EXPECT_EQ(cost_cq(chain, xi0, xi0, qd, kDot), 0.0);
  // ||(0.1, 0.2) - (1, 2)||^2 = 0.81 + 3.24.
  EXPECT_NEAR(cost_cq(chain, xi0, xiT, qd, kL2), 4.05, 1e-12);
}

TEST(CostCb, Examples) {
  const auto chain = testing::mobile_unit_arm();
  const Configuration xi0 = vec({0, 0, 0, 0});
  const Configuration qd = vec({0, 1, 0, 0});
  const auto points = CostSpec::default_body_points(CostKind::kBodyPoint, chain);
  EXPECT_EQ(points, (std::vector<BodyPoint>{BodyPoint::kElbow, BodyPoint::kShoulder}));
  EXPECT_EQ(cost_cb(chain, xi0, qd, qd, kL2, points), 0.0);
  // Elbow moved by (0, 0.5); ideal elbow motion (0, 1).
  EXPECT_NEAR(cost_cb(chain, xi0, vec({0, 0.5, 0, 0}), qd, kDot, kElbowOnly), -0.5, 1e-12);
}

TEST(CostCee, Examples) {
  const auto chain = KinematicChain::default_chain();
  const auto points = CostSpec::default_body_points(CostKind::kEmulateEndEffector, chain);
  EXPECT_EQ(points, (std::vector<BodyPoint>{BodyPoint::kBase, BodyPoint::kElbow,
                                            BodyPoint::kShoulder}));
  const Configuration xi0 = vec({0.1, -0.2, 0.3, 0.4, -0.5});
  const Pose xf(0.8, 0.1), xd(1.0, 0.2);
  EXPECT_EQ(cost_cee(chain, xi0, xi0, xf, xd, kDot, points), 0.0);
  // The base moved by exactly x_d - x_f contributes zero under l2.
  Configuration moved = xi0;
  moved.head<2>() += xd.position - xf.position;
  const std::vector<BodyPoint> base_only = {BodyPoint::kBase};
  EXPECT_NEAR(cost_cee(chain, xi0, moved, xf, xd, kL2, base_only), 0.0, 1e-24);
}

TEST(CostSpec, DefaultsAndValidation) {
  const CostSpec spec;
  EXPECT_EQ(spec.cost_kind, CostKind::kEmulateEndEffector);
  EXPECT_EQ(spec.metric.kind, MetricKind::kProj);
  EXPECT_EQ(spec.metric.k, 3);
  EXPECT_EQ(spec.lambda, 20.0);
  EXPECT_EQ(spec.alpha, 0.3);
  const auto chain = KinematicChain::default_chain();
  CostSpec bad;
  bad.body_points = {BodyPoint::kEndEffector};
  EXPECT_THROW(bad.validate(chain), Error);
  CostSpec empty;
  EXPECT_THROW(empty.validate(chain), Error);
  CostSpec lambda = spec;
  lambda.body_points = {BodyPoint::kElbow};
  lambda.lambda = 0.0;
  EXPECT_THROW(lambda.validate(chain), Error);
}

TEST(Smoothness, Examples) {
  const std::vector<Configuration> constant(5, vec({0.3, -0.1}));
  EXPECT_EQ(smoothness(constant), 0.0);
  const std::vector<Configuration> step = {vec({0, 0}), vec({1, 0})};
  EXPECT_EQ(smoothness(step), 1.0);
  const Configuration D = vec({0.7, -1.1, 0.4});
  for (int T : {1, 4, 10}) {
    std::vector<Configuration> line;
    for (int t = 0; t <= T; ++t) line.push_back(D * (static_cast<double>(t) / T));
    EXPECT_NEAR(smoothness(line), D.squaredNorm() / T, 1e-12);
  }
  EXPECT_THROW(smoothness(std::vector<Configuration>{vec({0})}), Error);
}

TEST(TotalObjective, Composition) {
  const auto chain = KinematicChain::default_chain();
  CostSpec spec;
  spec.body_points = CostSpec::default_body_points(spec.cost_kind, chain);
  spec.alpha = 0.0;
  const Configuration xi0 = vec({0, 0, 0.5, -0.5, 0.2});
  const CostContext ctx{xi0, std::nullopt, Pose(0.5, 0), Pose(0.6, 0), false};
  const std::vector<Configuration> constant(4, xi0);
  EXPECT_EQ(total_objective(spec, chain, constant, ctx), 0.0);

  std::vector<Configuration> moving = constant;
  moving[1] = xi0 + vec({0.05, 0, 0.1, 0, 0});
  moving[2] = moving[3] = xi0 + vec({0.1, 0, 0.2, 0, 0});
  const double c = similarity_cost(spec, chain, ctx, moving.back());
  const double smooth = smoothness(moving);
  spec.alpha = 0.3;
  EXPECT_NEAR(total_objective(spec, chain, moving, ctx), c + 0.3 + smooth / 20.0, 1e-15);
  spec.lambda = 40.0;
  EXPECT_NEAR(total_objective(spec, chain, moving, ctx) - c - 0.3, smooth / 40.0, 1e-15);
}

TEST(CostInvariant, AdditiveOverBodyPoints) {
  const auto chain = KinematicChain::default_chain();
  std::mt19937_64 rng(7);
  const std::vector<BodyPoint> b1 = {BodyPoint::kBase}, b2 = {BodyPoint::kElbow, BodyPoint::kShoulder};
  const std::vector<BodyPoint> both = {BodyPoint::kBase, BodyPoint::kElbow, BodyPoint::kShoulder};
  for (int trial = 0; trial < 100; ++trial) {
    const Configuration xi0 = testing::random_configuration(chain, rng);
    const Configuration xiT = testing::random_configuration(chain, rng);
    const Configuration qd = testing::random_configuration(chain, rng);
    const Pose xf(0.5, 0.1), xd(0.7, -0.2);
    for (const auto& m : {kL2, kDot, proj(3)}) {
      for (bool fixed : {false, true}) {
        EXPECT_NEAR(cost_cb(chain, xi0, xiT, qd, m, both, fixed),
                    cost_cb(chain, xi0, xiT, qd, m, b1, fixed) +
                        cost_cb(chain, xi0, xiT, qd, m, b2, fixed),
                    1e-12);
        EXPECT_NEAR(cost_cee(chain, xi0, xiT, xf, xd, m, both, fixed),
                    cost_cee(chain, xi0, xiT, xf, xd, m, b1, fixed) +
                        cost_cee(chain, xi0, xiT, xf, xd, m, b2, fixed),
                    1e-12);
      }
    }
  }
}

TEST(CostGradient, AllCostsMatchFiniteDifferences) {
  const auto chain = KinematicChain::default_chain();
  std::mt19937_64 rng(8);
  const std::vector<BodyPoint> points = {BodyPoint::kBase, BodyPoint::kElbow, BodyPoint::kShoulder};
  const Pose xf(0.6, 0.2), xd(0.8, 0.35);
  for (int trial = 0; trial < 100; ++trial) {
    const Configuration xi0 = testing::random_configuration(chain, rng);
    const Configuration xiT = testing::random_configuration(chain, rng);
    const Configuration qd = testing::random_configuration(chain, rng);
    for (const auto& m : {kL2, kDot, proj(3)}) {
      for (bool fixed : {false, true}) {
        const auto cq = testing::finite_difference(
            [&](const Eigen::VectorXd& x) { return cost_cq(chain, xi0, x, qd, m); }, xiT);
        EXPECT_LT(testing::relative_error(cost_cq_gradient(chain, xi0, xiT, qd, m), cq), 1e-5);
        const auto cb = testing::finite_difference(
            [&](const Eigen::VectorXd& x) { return cost_cb(chain, xi0, x, qd, m, points, fixed); },
            xiT);
        EXPECT_LT(testing::relative_error(cost_cb_gradient(chain, xi0, xiT, qd, m, points, fixed), cb),
                  1e-5);
        const auto ce = testing::finite_difference(
            [&](const Eigen::VectorXd& x) {
              return cost_cee(chain, xi0, x, xf, xd, m, points, fixed);
            },
            xiT);
        EXPECT_LT(
            testing::relative_error(cost_cee_gradient(chain, xi0, xiT, xf, xd, m, points, fixed), ce),
            1e-5);
      }
    }
  }
}

TEST(CostFixedBase, NonBasePointsIgnoreBaseMotion) {
  const auto chain = KinematicChain::default_chain();
  const Configuration xi0 = vec({0, 0, 0.3, 0.2, 0.1});
  Configuration xiT = xi0;
  xiT[0] = 0.25;  // base-only motion
  const std::vector<BodyPoint> arm = {BodyPoint::kElbow, BodyPoint::kShoulder};
  const Pose xf(0.5, 0), xd(0.6, 0);
  EXPECT_EQ(cost_cee(chain, xi0, xiT, xf, xd, kDot, arm, true), 0.0);
  EXPECT_LT(cost_cee(chain, xi0, xiT, xf, xd, kDot, arm, false), 0.0);
  const std::vector<BodyPoint> base = {BodyPoint::kBase};
  EXPECT_LT(cost_cee(chain, xi0, xiT, xf, xd, kDot, base, true), 0.0);
}

}  // namespace
}  // namespace expressive
