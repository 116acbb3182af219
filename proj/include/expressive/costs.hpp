#pragma once

/**
 * @file costs.hpp
 * @brief Similarity costs between an attempt and the motion of successful
 * execution, the vector distance metrics they are built on, and the
 * smoothness term.
 *
 * Every cost compares displacements measured from the attempt start xi0.
 * Gradients are taken with respect to the final waypoint xiT only, since xi0
 * is fixed during optimization.
 */

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"

namespace expressive {

enum class MetricKind { kL2, kDot, kProj };
enum class CostKind { kConfiguration, kBodyPoint, kEmulateEndEffector };

inline std::string_view metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::kL2: return "l2";
    case MetricKind::kDot: return "dot";
    case MetricKind::kProj: return "proj";
  }
  return "?";
}

inline std::optional<MetricKind> parse_metric(std::string_view s) {
  if (s == "l2") return MetricKind::kL2;
  if (s == "dot") return MetricKind::kDot;
  if (s == "proj") return MetricKind::kProj;
  return std::nullopt;
}

inline std::string_view cost_name(CostKind c) {
  switch (c) {
    case CostKind::kConfiguration: return "cq";
    case CostKind::kBodyPoint: return "cb";
    case CostKind::kEmulateEndEffector: return "cee";
  }
  return "?";
}

inline std::optional<CostKind> parse_cost(std::string_view s) {
  if (s == "cq") return CostKind::kConfiguration;
  if (s == "cb") return CostKind::kBodyPoint;
  if (s == "cee") return CostKind::kEmulateEndEffector;
  return std::nullopt;
}

struct DistanceMetric {
  MetricKind kind = MetricKind::kProj;
  int k = 3;

  /// Even exponents are rejected for proj: the sign-preserving power would
  /// still be well defined, but the literal (cos)^k rewards motion in the
  /// opposite direction.
  void validate() const {
    if (k < 1) {
      throw Error(ErrorCode::kValidation,
                  "k must be a positive integer (got " + std::to_string(k) + ")");
    }
    if (kind == MetricKind::kProj && k % 2 == 0) {
      throw Error(ErrorCode::kValidation,
                  "k must be odd for the proj metric (got " + std::to_string(k) +
                      ")");
    }
  }
};

/// Vectors shorter than this count as "no motion" under dot and proj.
inline constexpr double kZeroNorm = 1e-12;

inline double distance(const DistanceMetric& metric,
                       const Eigen::Ref<const Eigen::VectorXd>& v1,
                       const Eigen::Ref<const Eigen::VectorXd>& v2) {
  if (v1.size() != v2.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "distance between vectors of size " + std::to_string(v1.size()) +
                    " and " + std::to_string(v2.size()));
  }
  switch (metric.kind) {
    case MetricKind::kL2:
      return (v1 - v2).squaredNorm();
    case MetricKind::kDot:
      return -v1.dot(v2);
    case MetricKind::kProj: {
      const double n1 = v1.norm();
      const double n2 = v2.norm();
      if (n1 <= kZeroNorm || n2 <= kZeroNorm) return 0.0;
      const double c = std::clamp(v1.dot(v2) / (n1 * n2), -1.0, 1.0);
      return -n1 * n2 * c * std::pow(std::abs(c), metric.k - 1);
    }
  }
  return 0.0;
}

struct DistanceGradient {
  Eigen::VectorXd d_v1;
  Eigen::VectorXd d_v2;
};

inline DistanceGradient distance_gradient(const DistanceMetric& metric,
                                          const Eigen::Ref<const Eigen::VectorXd>& v1,
                                          const Eigen::Ref<const Eigen::VectorXd>& v2) {
  if (v1.size() != v2.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distance_gradient size mismatch");
  }
  switch (metric.kind) {
    case MetricKind::kL2: {
      const Eigen::VectorXd diff = 2.0 * (v1 - v2);
      return {diff, -diff};
    }
    case MetricKind::kDot:
      return {-v2, -v1};
    case MetricKind::kProj: {
      const double n1 = v1.norm();
      const double n2 = v2.norm();
      if (n1 <= kZeroNorm || n2 <= kZeroNorm) {
        return {Eigen::VectorXd::Zero(v1.size()), Eigen::VectorXd::Zero(v2.size())};
      }
      const double c = std::clamp(v1.dot(v2) / (n1 * n2), -1.0, 1.0);
      const double abs_pow = std::pow(std::abs(c), metric.k - 1);  // |c|^(k-1)
      const double g = c * abs_pow;                                // c|c|^(k-1)
      const double k = metric.k;
      // d = -|v1||v2| g(c); dg/dc = k|c|^(k-1).
      return {-k * abs_pow * v2 + (k - 1.0) * g * (n2 / n1) * v1,
              -k * abs_pow * v1 + (k - 1.0) * g * (n1 / n2) * v2};
    }
  }
  return {};
}

struct CostSpec {
  CostKind cost_kind = CostKind::kEmulateEndEffector;
  DistanceMetric metric;
  std::vector<BodyPoint> body_points;
  double lambda = 20.0;
  double alpha = 0.3;

  /// Body points used when none are given: {el, sh} for cb and {ba, el, sh}
  /// for cee, restricted to the points the chain declares.
  static std::vector<BodyPoint> default_body_points(CostKind kind,
                                                    const KinematicChain& chain) {
    std::vector<BodyPoint> candidates;
    if (kind == CostKind::kBodyPoint) {
      candidates = {BodyPoint::kElbow, BodyPoint::kShoulder};
    } else if (kind == CostKind::kEmulateEndEffector) {
      candidates = {BodyPoint::kBase, BodyPoint::kElbow, BodyPoint::kShoulder};
    }
    std::vector<BodyPoint> out;
    for (BodyPoint b : candidates) {
      if (chain.has_body_point(b)) out.push_back(b);
    }
    return out;
  }

  void validate(const KinematicChain& chain) const {
    metric.validate();
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::kValidation, "lambda must be positive");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw Error(ErrorCode::kValidation, "alpha must be >= 0");
    }
    if (cost_kind == CostKind::kConfiguration) return;
    if (body_points.empty()) {
      throw Error(ErrorCode::kValidation,
                  std::string("body_points must be non-empty for cost ") +
                      std::string(cost_name(cost_kind)));
    }
    for (BodyPoint b : body_points) {
      if (b == BodyPoint::kEndEffector) {
        throw Error(ErrorCode::kValidation,
                    "body_points may only contain ba, sh and el");
      }
      chain.location(b);  // throws for undeclared points
    }
  }
};

namespace detail {

inline Configuration with_base_of(const KinematicChain& chain, Configuration q,
                                  const Configuration& reference) {
  if (chain.base_mobile()) q.head<2>() = reference.head<2>();
  return q;
}

/// Position of b at q. With fixed_base, non-base points are evaluated with
/// the base held at the reference configuration's base coordinates.
inline Eigen::Vector2d cost_position(const KinematicChain& chain,
                                     const Configuration& q, BodyPoint b,
                                     const Configuration& reference, bool fixed_base) {
  if (fixed_base && b != BodyPoint::kBase) {
    return body_position(chain, with_base_of(chain, q, reference), b);
  }
  return body_position(chain, q, b);
}

inline Eigen::MatrixXd cost_jacobian(const KinematicChain& chain,
                                     const Configuration& q, BodyPoint b,
                                     const Configuration& reference, bool fixed_base) {
  if (fixed_base && b != BodyPoint::kBase) {
    Eigen::MatrixXd jac =
        body_jacobian(chain, with_base_of(chain, q, reference), b);
    jac.leftCols(chain.base_dof()).setZero();
    return jac;
  }
  return body_jacobian(chain, q, b);
}

inline void check_same_dof(const KinematicChain& chain,
                           std::initializer_list<const Configuration*> qs) {
  for (const auto* q : qs) chain.check_dimension(*q);
}

}  // namespace detail

inline double cost_cq(const KinematicChain& chain, const Configuration& xi0,
                      const Configuration& xiT, const Configuration& qd,
                      const DistanceMetric& metric) {
  detail::check_same_dof(chain, {&xi0, &xiT, &qd});
  return distance(metric, xiT - xi0, qd - xi0);
}

inline Eigen::VectorXd cost_cq_gradient(const KinematicChain& chain,
                                        const Configuration& xi0,
                                        const Configuration& xiT,
                                        const Configuration& qd,
                                        const DistanceMetric& metric) {
  detail::check_same_dof(chain, {&xi0, &xiT, &qd});
  return distance_gradient(metric, xiT - xi0, qd - xi0).d_v1;
}

inline double cost_cb(const KinematicChain& chain, const Configuration& xi0,
                      const Configuration& xiT, const Configuration& qd,
                      const DistanceMetric& metric,
                      std::span<const BodyPoint> body_points, bool fixed_base = false) {
  detail::check_same_dof(chain, {&xi0, &xiT, &qd});
  double sum = 0.0;
  for (BodyPoint b : body_points) {
    const Eigen::Vector2d start = body_position(chain, xi0, b);
    const Eigen::Vector2d moved =
        detail::cost_position(chain, xiT, b, xi0, fixed_base) - start;
    const Eigen::Vector2d ideal =
        detail::cost_position(chain, qd, b, xi0, fixed_base) - start;
    sum += distance(metric, moved, ideal);
  }
  return sum;
}

inline Eigen::VectorXd cost_cb_gradient(const KinematicChain& chain,
                                        const Configuration& xi0,
                                        const Configuration& xiT,
                                        const Configuration& qd,
                                        const DistanceMetric& metric,
                                        std::span<const BodyPoint> body_points,
                                        bool fixed_base = false) {
  detail::check_same_dof(chain, {&xi0, &xiT, &qd});
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(chain.dof());
  for (BodyPoint b : body_points) {
    const Eigen::Vector2d start = body_position(chain, xi0, b);
    const Eigen::Vector2d moved =
        detail::cost_position(chain, xiT, b, xi0, fixed_base) - start;
    const Eigen::Vector2d ideal =
        detail::cost_position(chain, qd, b, xi0, fixed_base) - start;
    const auto dd = distance_gradient(metric, moved, ideal);
    grad += detail::cost_jacobian(chain, xiT, b, xi0, fixed_base).transpose() * dd.d_v1;
  }
  return grad;
}

inline double cost_cee(const KinematicChain& chain, const Configuration& xi0,
                       const Configuration& xiT, const Pose& xf, const Pose& xd,
                       const DistanceMetric& metric,
                       std::span<const BodyPoint> body_points, bool fixed_base = false) {
  detail::check_same_dof(chain, {&xi0, &xiT});
  const Eigen::Vector2d ee_motion = xd.position - xf.position;
  double sum = 0.0;
  for (BodyPoint b : body_points) {
    const Eigen::Vector2d moved = detail::cost_position(chain, xiT, b, xi0, fixed_base) -
                                  body_position(chain, xi0, b);
    sum += distance(metric, moved, ee_motion);
  }
  return sum;
}

inline Eigen::VectorXd cost_cee_gradient(const KinematicChain& chain,
                                         const Configuration& xi0,
                                         const Configuration& xiT, const Pose& xf,
                                         const Pose& xd, const DistanceMetric& metric,
                                         std::span<const BodyPoint> body_points,
                                         bool fixed_base = false) {
  detail::check_same_dof(chain, {&xi0, &xiT});
  const Eigen::Vector2d ee_motion = xd.position - xf.position;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(chain.dof());
  for (BodyPoint b : body_points) {
    const Eigen::Vector2d moved = detail::cost_position(chain, xiT, b, xi0, fixed_base) -
                                  body_position(chain, xi0, b);
    const auto dd = distance_gradient(metric, moved, ee_motion);
    grad += detail::cost_jacobian(chain, xiT, b, xi0, fixed_base).transpose() * dd.d_v1;
  }
  return grad;
}

/// Sum of squared steps between consecutive waypoints.
inline double smoothness(std::span<const Configuration> waypoints) {
  if (waypoints.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "smoothness needs at least two waypoints");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < waypoints.size(); ++t) {
    sum += (waypoints[t + 1] - waypoints[t]).squaredNorm();
  }
  return sum;
}

/// Everything a similarity cost needs besides the trajectory itself.
struct CostContext {
  Configuration xi0;
  std::optional<Configuration> qd;  // required by cq and cb
  Pose xf;
  Pose xd;
  bool fixed_base = false;
};

inline const Configuration& require_qd(const CostContext& ctx) {
  if (!ctx.qd) {
    throw Error(ErrorCode::kInvalidArgument,
                "cost needs a desired configuration q_d");
  }
  return *ctx.qd;
}

/// The similarity cost c selected by spec.cost_kind, without the bias.
inline double similarity_cost(const CostSpec& spec, const KinematicChain& chain,
                              const CostContext& ctx, const Configuration& xiT) {
  switch (spec.cost_kind) {
    case CostKind::kConfiguration:
      return cost_cq(chain, ctx.xi0, xiT, require_qd(ctx), spec.metric);
    case CostKind::kBodyPoint:
      return cost_cb(chain, ctx.xi0, xiT, require_qd(ctx), spec.metric,
                     spec.body_points, ctx.fixed_base);
    case CostKind::kEmulateEndEffector:
      return cost_cee(chain, ctx.xi0, xiT, ctx.xf, ctx.xd, spec.metric,
                      spec.body_points, ctx.fixed_base);
  }
  return 0.0;
}

inline Eigen::VectorXd similarity_gradient(const CostSpec& spec,
                                           const KinematicChain& chain,
                                           const CostContext& ctx,
                                           const Configuration& xiT) {
  switch (spec.cost_kind) {
    case CostKind::kConfiguration:
      return cost_cq_gradient(chain, ctx.xi0, xiT, require_qd(ctx), spec.metric);
    case CostKind::kBodyPoint:
      return cost_cb_gradient(chain, ctx.xi0, xiT, require_qd(ctx), spec.metric,
                              spec.body_points, ctx.fixed_base);
    case CostKind::kEmulateEndEffector:
      return cost_cee_gradient(chain, ctx.xi0, xiT, ctx.xf, ctx.xd, spec.metric,
                               spec.body_points, ctx.fixed_base);
  }
  return {};
}

/// (c + alpha) + smoothness / lambda, where c is evaluated on the last waypoint.
inline double total_objective(const CostSpec& spec, const KinematicChain& chain,
                              std::span<const Configuration> waypoints,
                              const CostContext& ctx) {
  const double smooth = smoothness(waypoints);
  return similarity_cost(spec, chain, ctx, waypoints.back()) + spec.alpha +
         smooth / spec.lambda;
}

}  // namespace expressive
