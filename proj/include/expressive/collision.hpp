#pragma once

// Signed distance between the chain's link segments and primitive obstacles.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"

namespace expressive {

/// Returned by signed_distance when nothing is checked.
inline constexpr double kNoObstacleDistance = 1e9;

struct Circle {
  Eigen::Vector2d center;
  double radius;
};

struct Box {
  Eigen::Vector2d min;
  Eigen::Vector2d max;
};

struct Obstacle {
  std::string name;
  std::variant<Circle, Box> shape;

  static Obstacle circle(std::string name, Eigen::Vector2d center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw Error(ErrorCode::kValidation,
                  "obstacle '" + name + "': radius must be positive");
    }
    return Obstacle{std::move(name), Circle{center, radius}};
  }

  static Obstacle box(std::string name, Eigen::Vector2d min, Eigen::Vector2d max) {
    if (!(min.x() < max.x() && min.y() < max.y())) {
      throw Error(ErrorCode::kValidation,
                  "obstacle '" + name + "': box min must be < max component-wise");
    }
    return Obstacle{std::move(name), Box{min, max}};
  }
};

struct CollisionModel {
  std::vector<Obstacle> obstacles;
  double link_clearance = 0.0;
  /// (link index, obstacle name) pairs that are never checked.
  std::set<std::pair<int, std::string>> ignore_pairs;

  bool ignored(int link, const std::string& obstacle) const {
    return ignore_pairs.contains({link, obstacle});
  }
};

namespace detail {

/// Distance from a segment to an obstacle, with the witness parameter on the
/// segment and the gradient of the distance w.r.t. the witness point.
struct SegmentQuery {
  double distance;
  double s;
  Eigen::Vector2d gradient;
};

inline Eigen::Vector2d closest_on_segment(const Eigen::Vector2d& a,
                                          const Eigen::Vector2d& b,
                                          const Eigen::Vector2d& p, double* s_out) {
  const Eigen::Vector2d ab = b - a;
  const double len_sq = ab.squaredNorm();
  double s = len_sq > 0.0 ? (p - a).dot(ab) / len_sq : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  if (s_out) *s_out = s;
  return a + s * ab;
}

inline SegmentQuery segment_circle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                   const Circle& c) {
  double s = 0.0;
  const Eigen::Vector2d p = closest_on_segment(a, b, c.center, &s);
  const Eigen::Vector2d diff = p - c.center;
  const double dist = diff.norm();
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  if (dist > 0.0) grad = diff / dist;
  return {dist - c.radius, s, grad};
}

inline double point_box(const Eigen::Vector2d& p, const Box& box,
                        Eigen::Vector2d* gradient) {
  const Eigen::Vector2d center = 0.5 * (box.min + box.max);
  const Eigen::Vector2d d = (box.min - p).cwiseMax(p - box.max);
  const Eigen::Vector2d outside_vec = d.cwiseMax(0.0);
  const double outside = outside_vec.norm();
  const double inside = std::min(std::max(d.x(), d.y()), 0.0);
  if (gradient) {
    const Eigen::Vector2d sign(p.x() >= center.x() ? 1.0 : -1.0,
                               p.y() >= center.y() ? 1.0 : -1.0);
    if (outside > 0.0) {
      *gradient = outside_vec.cwiseProduct(sign) / outside;
    } else if (d.x() >= d.y()) {
      *gradient = Eigen::Vector2d(sign.x(), 0.0);
    } else {
      *gradient = Eigen::Vector2d(0.0, sign.y());
    }
  }
  return outside + inside;
}

/// Liang-Barsky clip of the segment against the box; returns [s_in, s_out].
inline std::optional<std::pair<double, double>> clip_segment(
    const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Box& box) {
  double lo = 0.0;
  double hi = 1.0;
  const Eigen::Vector2d dir = b - a;
  for (int axis = 0; axis < 2; ++axis) {
    if (dir[axis] == 0.0) {
      if (a[axis] < box.min[axis] || a[axis] > box.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[axis] - a[axis]) / dir[axis];
    double t1 = (box.max[axis] - a[axis]) / dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return std::nullopt;
  }
  return std::make_pair(lo, hi);
}

inline SegmentQuery segment_box(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Box& box) {
  const Eigen::Vector2d dir = b - a;
  SegmentQuery best{std::numeric_limits<double>::infinity(), 0.0,
                    Eigen::Vector2d::Zero()};
  auto consider_point = [&](double s) {
    Eigen::Vector2d grad;
    const double d = point_box(a + s * dir, box, &grad);
    if (d < best.distance) best = {d, s, grad};
  };

  if (auto clip = clip_segment(a, b, box)) {
    // Inside the box the signed distance is a max of four affine functions of
    // s, so its minimum over the clipped interval sits at an endpoint or at a
    // crossing of two of them.
    const auto [s_in, s_out] = *clip;
    consider_point(s_in);
    consider_point(s_out);
    const std::array<std::pair<double, double>, 4> faces = {{
        {box.min.x() - a.x(), -dir.x()},
        {a.x() - box.max.x(), dir.x()},
        {box.min.y() - a.y(), -dir.y()},
        {a.y() - box.max.y(), dir.y()},
    }};
    const std::array<Eigen::Vector2d, 4> normals = {
        Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, -1),
        Eigen::Vector2d(0, 1)};
    for (std::size_t i = 0; i < faces.size(); ++i) {
      for (std::size_t j = i + 1; j < faces.size(); ++j) {
        const double slope = faces[i].second - faces[j].second;
        if (slope == 0.0) continue;
        const double s = (faces[j].first - faces[i].first) / slope;
        if (!(s > s_in && s < s_out)) continue;
        const double before = best.distance;
        consider_point(s);
        // At a minimum on the kink the witness slides along the segment, so
        // the gradient mixes both faces with weights that cancel the slopes.
        if (best.distance < before && faces[i].second * faces[j].second < 0.0) {
          const double w = -faces[j].second / slope;
          best.gradient = w * normals[i] + (1.0 - w) * normals[j];
        }
      }
    }
    return best;
  }

  // Disjoint convex sets: the closest pair involves a vertex of one of them.
  consider_point(0.0);
  consider_point(1.0);
  const std::array<Eigen::Vector2d, 4> corners = {
      box.min, Eigen::Vector2d(box.max.x(), box.min.y()), box.max,
      Eigen::Vector2d(box.min.x(), box.max.y())};
  for (const auto& corner : corners) {
    double s = 0.0;
    const Eigen::Vector2d p = closest_on_segment(a, b, corner, &s);
    const Eigen::Vector2d diff = p - corner;
    const double d = diff.norm();
    if (d < best.distance && d > 0.0) best = {d, s, diff / d};
  }
  return best;
}

inline SegmentQuery segment_obstacle(const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b,
                                     const Obstacle& obstacle) {
  return std::visit(
      [&](const auto& shape) -> SegmentQuery {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return segment_circle(a, b, shape);
        } else {
          return segment_box(a, b, shape);
        }
      },
      obstacle.shape);
}

}  // namespace detail

/// One checked (link, obstacle) pair: clearance-adjusted distance and its
/// gradient with respect to the configuration.
struct PairDistance {
  int link;
  std::size_t obstacle;
  double distance;
  Eigen::VectorXd gradient;
};

/// Every non-ignored (link, obstacle) pair. Gradients are filled only when
/// requested.
inline std::vector<PairDistance> pair_distances(const CollisionModel& model,
                                                const KinematicChain& chain,
                                                const Configuration& q,
                                                bool with_gradient) {
  std::vector<PairDistance> out;
  if (model.obstacles.empty()) return out;
  const auto points = chain.joint_positions(q);
  std::vector<Eigen::MatrixXd> jacobians;
  if (with_gradient) {
    for (int loc = 0; loc <= chain.num_links(); ++loc) {
      jacobians.push_back(chain.location_jacobian(points, loc));
    }
  }
  for (int link = 0; link < chain.num_links(); ++link) {
    for (std::size_t o = 0; o < model.obstacles.size(); ++o) {
      const Obstacle& obstacle = model.obstacles[o];
      if (model.ignored(link, obstacle.name)) continue;
      const auto query =
          detail::segment_obstacle(points[link], points[link + 1], obstacle);
      PairDistance pair{link, o, query.distance - model.link_clearance, {}};
      if (with_gradient) {
        const Eigen::MatrixXd witness_jac =
            (1.0 - query.s) * jacobians[link] + query.s * jacobians[link + 1];
        pair.gradient = witness_jac.transpose() * query.gradient;
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

/// Minimum clearance-adjusted distance over all checked pairs; positive is
/// free, negative is penetrating.
inline double signed_distance(const CollisionModel& model,
                              const KinematicChain& chain, const Configuration& q) {
  chain.check_dimension(q);
  double best = kNoObstacleDistance;
  for (const auto& pair : pair_distances(model, chain, q, false)) {
    best = std::min(best, pair.distance);
  }
  return best;
}

struct CollisionReport {
  bool collision_free = true;
  std::optional<std::size_t> first_violation;
  double violation_distance = kNoObstacleDistance;
};

inline CollisionReport is_collision_free(const CollisionModel& model,
                                         const KinematicChain& chain,
                                         std::span<const Configuration> waypoints,
                                         double tolerance) {
  if (waypoints.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory must be non-empty");
  }
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const double sd = signed_distance(model, chain, waypoints[i]);
    if (sd < tolerance) return {false, i, sd};
  }
  return {};
}

}  // namespace expressive
