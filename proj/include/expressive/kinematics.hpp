#pragma once

/**
 * @file kinematics.hpp
 * @brief Planar serial chain on an optional translating base.
 *
 * Configuration layout: the two prismatic base coordinates (x, y) come first
 * when the base is mobile, followed by one angle per revolute joint. The arm is
 * mounted at the base origin; the base never rotates.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expressive/error.hpp"

namespace expressive {

using Configuration = Eigen::VectorXd;

enum class BodyPoint { kBase, kShoulder, kElbow, kEndEffector };

inline std::string_view body_point_name(BodyPoint b) {
  switch (b) {
    case BodyPoint::kBase: return "ba";
    case BodyPoint::kShoulder: return "sh";
    case BodyPoint::kElbow: return "el";
    case BodyPoint::kEndEffector: return "ee";
  }
  return "?";
}

inline std::optional<BodyPoint> parse_body_point(std::string_view name) {
  if (name == "ba") return BodyPoint::kBase;
  if (name == "sh") return BodyPoint::kShoulder;
  if (name == "el") return BodyPoint::kElbow;
  if (name == "ee") return BodyPoint::kEndEffector;
  return std::nullopt;
}

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

struct Pose {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double orientation = 0.0;

  Pose() = default;
  Pose(Eigen::Vector2d p, double theta)
      : position(std::move(p)), orientation(normalize_angle(theta)) {}
  Pose(double x, double y, double theta = 0.0)
      : Pose(Eigen::Vector2d(x, y), theta) {}
};

struct JointLimit {
  double lower = -std::numbers::pi;
  double upper = std::numbers::pi;

  bool contains(double v, double tol = 0.0) const {
    return v >= lower - tol && v <= upper + tol;
  }
  double clamp(double v) const { return std::clamp(v, lower, upper); }
};

/// Chain location of a body point: kBaseLocation is the base origin, otherwise
/// the number of links between the arm mount and the point.
inline constexpr int kBaseLocation = -1;

class KinematicChain {
 public:
  KinematicChain(bool base_mobile, std::vector<double> link_lengths,
                 std::vector<JointLimit> joint_limits,
                 std::map<BodyPoint, int> body_points = {})
      : base_mobile_(base_mobile),
        link_lengths_(std::move(link_lengths)),
        joint_limits_(std::move(joint_limits)),
        body_points_(std::move(body_points)) {
    if (link_lengths_.empty()) {
      throw Error(ErrorCode::kValidation, "chain needs at least one link");
    }
    for (std::size_t i = 0; i < link_lengths_.size(); ++i) {
      if (!(link_lengths_[i] > 0.0) || !std::isfinite(link_lengths_[i])) {
        throw Error(ErrorCode::kValidation,
                    "link_lengths[" + std::to_string(i) +
                        "] must be strictly positive");
      }
    }
    if (static_cast<int>(joint_limits_.size()) != dof()) {
      throw Error(ErrorCode::kValidation,
                  "joint_limits has " + std::to_string(joint_limits_.size()) +
                      " entries, chain has " + std::to_string(dof()) +
                      " degrees of freedom");
    }
    for (std::size_t i = 0; i < joint_limits_.size(); ++i) {
      const auto& lim = joint_limits_[i];
      if (!(lim.lower < lim.upper) || !std::isfinite(lim.lower) ||
          !std::isfinite(lim.upper)) {
        throw Error(ErrorCode::kValidation,
                    "joint_limits[" + std::to_string(i) +
                        "] must satisfy lower < upper");
      }
    }
    if (body_points_.empty()) body_points_ = default_body_points();
    validate_body_points();
  }

  /// Mobile base (x, y) carrying a 3R arm.
  static KinematicChain default_chain() {
    return KinematicChain(true, {0.5, 0.4, 0.3},
                          {{-1.0, 1.0}, {-1.0, 1.0},
                           {-std::numbers::pi, std::numbers::pi},
                           {-std::numbers::pi, std::numbers::pi},
                           {-std::numbers::pi, std::numbers::pi}});
  }

  bool base_mobile() const { return base_mobile_; }
  int base_dof() const { return base_mobile_ ? 2 : 0; }
  int num_links() const { return static_cast<int>(link_lengths_.size()); }
  int dof() const { return base_dof() + num_links(); }
  const std::vector<double>& link_lengths() const { return link_lengths_; }
  const std::vector<JointLimit>& joint_limits() const { return joint_limits_; }
  const std::map<BodyPoint, int>& body_points() const { return body_points_; }

  double total_length() const {
    double sum = 0.0;
    for (double l : link_lengths_) sum += l;
    return sum;
  }

  bool has_body_point(BodyPoint b) const { return body_points_.contains(b); }

  int location(BodyPoint b) const {
    auto it = body_points_.find(b);
    if (it == body_points_.end()) {
      throw Error(ErrorCode::kUnknownBodyPoint,
                  "body point '" + std::string(body_point_name(b)) +
                      "' is not declared on this chain");
    }
    return it->second;
  }

  void check_dimension(const Configuration& q) const {
    if (q.size() != dof()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "configuration has " + std::to_string(q.size()) +
                      " coordinates, expected " + std::to_string(dof()));
    }
  }

  bool within_limits(const Configuration& q, double tol = 0.0) const {
    if (q.size() != dof()) return false;
    for (int i = 0; i < dof(); ++i) {
      if (!joint_limits_[i].contains(q[i], tol)) return false;
    }
    return true;
  }

  Configuration clamp(Configuration q) const {
    for (int i = 0; i < dof(); ++i) q[i] = joint_limits_[i].clamp(q[i]);
    return q;
  }

  Eigen::Vector2d base_position(const Configuration& q) const {
    return base_mobile_ ? Eigen::Vector2d(q[0], q[1]) : Eigen::Vector2d::Zero();
  }

  /// Mount point followed by every link endpoint (num_links() + 1 points).
  std::vector<Eigen::Vector2d> joint_positions(const Configuration& q) const {
    check_dimension(q);
    std::vector<Eigen::Vector2d> points;
    points.reserve(link_lengths_.size() + 1);
    Eigen::Vector2d p = base_position(q);
    points.push_back(p);
    double angle = 0.0;
    for (int i = 0; i < num_links(); ++i) {
      angle += q[base_dof() + i];
      p += link_lengths_[i] * Eigen::Vector2d(std::cos(angle), std::sin(angle));
      points.push_back(p);
    }
    return points;
  }

  /// Cumulative joint angle after `links` links.
  double cumulative_angle(const Configuration& q, int links) const {
    double angle = 0.0;
    for (int i = 0; i < links; ++i) angle += q[base_dof() + i];
    return angle;
  }

  Eigen::Vector2d location_position(const Configuration& q, int loc) const {
    check_dimension(q);
    if (loc == kBaseLocation) return base_position(q);
    Eigen::Vector2d p = base_position(q);
    double angle = 0.0;
    for (int i = 0; i < loc; ++i) {
      angle += q[base_dof() + i];
      p += link_lengths_[i] * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    }
    return p;
  }

  /// d(position of location)/dq, a 2 x dof matrix.
  Eigen::MatrixXd location_jacobian(const Configuration& q, int loc) const {
    if (loc == kBaseLocation || loc == 0) {
      check_dimension(q);
      return location_jacobian(std::vector<Eigen::Vector2d>{}, loc);
    }
    return location_jacobian(joint_positions(q), loc);
  }

  /// Same, from precomputed joint_positions().
  Eigen::MatrixXd location_jacobian(const std::vector<Eigen::Vector2d>& points,
                                    int loc) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, dof());
    if (base_mobile_) jac.leftCols<2>().setIdentity();
    if (loc == kBaseLocation || loc == 0) return jac;
    const Eigen::Vector2d& tip = points[loc];
    for (int j = 0; j < loc; ++j) {
      const Eigen::Vector2d r = tip - points[j];
      jac(0, base_dof() + j) = -r.y();
      jac(1, base_dof() + j) = r.x();
    }
    return jac;
  }

 private:
  std::map<BodyPoint, int> default_body_points() const {
    std::map<BodyPoint, int> points;
    if (base_mobile_) points[BodyPoint::kBase] = kBaseLocation;
    points[BodyPoint::kShoulder] = 0;
    if (num_links() >= 2) points[BodyPoint::kElbow] = 1;
    points[BodyPoint::kEndEffector] = num_links();
    return points;
  }

  void validate_body_points() const {
    auto ee = body_points_.find(BodyPoint::kEndEffector);
    if (ee == body_points_.end() || ee->second != num_links()) {
      throw Error(ErrorCode::kValidation,
                  "body point ee must be the distal endpoint of the last link "
                  "(location " + std::to_string(num_links()) + ")");
    }
    auto ba = body_points_.find(BodyPoint::kBase);
    if (base_mobile_ != (ba != body_points_.end())) {
      throw Error(ErrorCode::kValidation,
                  "body point ba must be declared iff the base is mobile");
    }
    if (ba != body_points_.end() && ba->second != kBaseLocation) {
      throw Error(ErrorCode::kValidation, "body point ba must be the base origin");
    }
    auto sh = body_points_.find(BodyPoint::kShoulder);
    if (sh != body_points_.end() && sh->second != 0) {
      throw Error(ErrorCode::kValidation,
                  "body point sh must be the arm mount (location 0)");
    }
    auto el = body_points_.find(BodyPoint::kElbow);
    if (el != body_points_.end() &&
        (el->second < 1 || el->second >= num_links())) {
      throw Error(ErrorCode::kValidation,
                  "body point el must be an interior joint (1.." +
                      std::to_string(num_links() - 1) + ")");
    }
  }

  bool base_mobile_;
  std::vector<double> link_lengths_;
  std::vector<JointLimit> joint_limits_;
  std::map<BodyPoint, int> body_points_;
};

inline Pose forward_kinematics(const KinematicChain& chain,
                               const Configuration& q, BodyPoint b) {
  const int loc = chain.location(b);
  chain.check_dimension(q);
  const double angle = loc == kBaseLocation ? 0.0 : chain.cumulative_angle(q, loc);
  return Pose(chain.location_position(q, loc), angle);
}

inline Eigen::Vector2d body_position(const KinematicChain& chain,
                                     const Configuration& q, BodyPoint b) {
  return forward_kinematics(chain, q, b).position;
}

inline Eigen::MatrixXd body_jacobian(const KinematicChain& chain,
                                     const Configuration& q, BodyPoint b) {
  return chain.location_jacobian(q, chain.location(b));
}

namespace ik {

inline constexpr int kNumSeeds = 16;
inline constexpr int kMaxIterations = 200;
inline constexpr double kDamping = 1e-3;
inline constexpr double kResidualTolerance = 1e-6;
inline constexpr double kDedupTolerance = 1e-5;

struct Residual {
  Eigen::VectorXd error;  // target - current; 2 or 3 rows
  Eigen::MatrixXd jacobian;
};

inline Residual ee_residual(const KinematicChain& chain, const Configuration& q,
                            const Pose& target, bool constrain_orientation) {
  const int rows = constrain_orientation ? 3 : 2;
  Residual r{Eigen::VectorXd(rows), Eigen::MatrixXd::Zero(rows, chain.dof())};
  const Pose ee = forward_kinematics(chain, q, BodyPoint::kEndEffector);
  r.error.head<2>() = target.position - ee.position;
  r.jacobian.topRows<2>() = body_jacobian(chain, q, BodyPoint::kEndEffector);
  if (constrain_orientation) {
    r.error[2] = normalize_angle(target.orientation - ee.orientation);
    r.jacobian.row(2).tail(chain.num_links()).setOnes();
  }
  return r;
}

/// Damped least-squares refinement clamped to the joint limits. Returns the
/// final configuration; the caller checks the residual.
inline Configuration refine(const KinematicChain& chain, Configuration q,
                            const Pose& target, bool constrain_orientation,
                            int max_iterations = kMaxIterations,
                            double stop_tolerance = 1e-12) {
  const double damping_sq = kDamping * kDamping;
  for (int it = 0; it < max_iterations; ++it) {
    const Residual r = ee_residual(chain, q, target, constrain_orientation);
    if (r.error.norm() <= stop_tolerance) break;
    const Eigen::MatrixXd jjt =
        r.jacobian * r.jacobian.transpose() +
        damping_sq * Eigen::MatrixXd::Identity(r.error.size(), r.error.size());
    const Eigen::VectorXd step =
        r.jacobian.transpose() * jjt.ldlt().solve(r.error);
    q = chain.clamp(q + step);
  }
  return q;
}

/// Rank-1 lattice of kNumSeeds points spread uniformly over the joint box.
inline std::vector<Configuration> seed_grid(const KinematicChain& chain) {
  static constexpr std::array<int, 8> kMultipliers = {1, 3, 5, 7, 9, 11, 13, 15};
  std::vector<Configuration> seeds;
  seeds.reserve(kNumSeeds);
  for (int i = 0; i < kNumSeeds; ++i) {
    Configuration q(chain.dof());
    for (int j = 0; j < chain.dof(); ++j) {
      const int cell = (i * kMultipliers[j % kMultipliers.size()] + j / 8) % kNumSeeds;
      const double frac = (cell + 0.5) / kNumSeeds;
      const auto& lim = chain.joint_limits()[j];
      q[j] = lim.lower + frac * (lim.upper - lim.lower);
    }
    seeds.push_back(std::move(q));
  }
  return seeds;
}

inline bool satisfies(const KinematicChain& chain, const Configuration& q,
                      const Pose& target, bool constrain_orientation) {
  const Pose ee = forward_kinematics(chain, q, BodyPoint::kEndEffector);
  if ((ee.position - target.position).norm() > kResidualTolerance) return false;
  if (constrain_orientation &&
      std::abs(normalize_angle(ee.orientation - target.orientation)) >
          kResidualTolerance) {
    return false;
  }
  return chain.within_limits(q);
}

/// Shifts each revolute angle by multiples of 2*pi into its limits, if possible.
inline std::optional<Configuration> wrap_into_limits(const KinematicChain& chain,
                                                     Configuration q) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (int i = chain.base_dof(); i < chain.dof(); ++i) {
    const auto& lim = chain.joint_limits()[i];
    double v = normalize_angle(q[i]);
    while (v > lim.upper && v - kTwoPi >= lim.lower) v -= kTwoPi;
    while (v < lim.lower && v + kTwoPi <= lim.upper) v += kTwoPi;
    if (!lim.contains(v)) return std::nullopt;
    q[i] = v;
  }
  return q;
}

inline std::vector<Configuration> two_link_branches(const KinematicChain& chain,
                                                    const Pose& target) {
  const double l1 = chain.link_lengths()[0];
  const double l2 = chain.link_lengths()[1];
  const Eigen::Vector2d& p = target.position;
  const double c2 =
      (p.squaredNorm() - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  constexpr double kBoundarySlack = 1e-12;
  if (c2 > 1.0 + kBoundarySlack || c2 < -1.0 - kBoundarySlack) return {};
  const double elbow = std::acos(std::clamp(c2, -1.0, 1.0));
  std::vector<Configuration> out;
  for (double q2 : {elbow, -elbow}) {
    const double q1 = std::atan2(p.y(), p.x()) -
                      std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
    Configuration q(2);
    q << q1, q2;
    if (auto wrapped = wrap_into_limits(chain, q)) out.push_back(*wrapped);
  }
  return out;
}

inline void sort_and_dedup(std::vector<Configuration>& solutions) {
  std::sort(solutions.begin(), solutions.end(),
            [](const Configuration& a, const Configuration& b) {
              return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                                  b.end());
            });
  std::vector<Configuration> unique;
  for (auto& q : solutions) {
    const bool duplicate = std::any_of(
        unique.begin(), unique.end(), [&](const Configuration& u) {
          return (u - q).cwiseAbs().maxCoeff() <= kDedupTolerance;
        });
    if (!duplicate) unique.push_back(std::move(q));
  }
  solutions = std::move(unique);
}

}  // namespace ik

/// All inverse-kinematics solutions found for the end-effector target.
///
/// A fixed-base two-link arm uses the closed-form elbow branches; any other
/// chain runs damped least squares from a deterministic lattice of seeds.
/// Unreachable targets yield an empty list.
inline std::vector<Configuration> ik_solutions(const KinematicChain& chain,
                                               const Pose& target,
                                               bool constrain_orientation = false) {
  std::vector<Configuration> solutions;
  if (!chain.base_mobile() && chain.num_links() == 2) {
    for (auto& q : ik::two_link_branches(chain, target)) {
      if (ik::satisfies(chain, q, target, constrain_orientation)) {
        solutions.push_back(std::move(q));
      }
    }
  } else {
    for (const auto& seed : ik::seed_grid(chain)) {
      Configuration q = ik::refine(chain, seed, target, constrain_orientation);
      if (ik::satisfies(chain, q, target, constrain_orientation)) {
        solutions.push_back(std::move(q));
      }
    }
  }
  ik::sort_and_dedup(solutions);
  return solutions;
}

inline Configuration closest_ik(const KinematicChain& chain, const Pose& target,
                                const Configuration& reference,
                                bool constrain_orientation = false) {
  chain.check_dimension(reference);
  const auto solutions = ik_solutions(chain, target, constrain_orientation);
  if (solutions.empty()) {
    throw Error(ErrorCode::kUnreachableTarget,
                "no inverse kinematics solution for target (" +
                    std::to_string(target.position.x()) + ", " +
                    std::to_string(target.position.y()) + ")");
  }
  std::size_t best = 0;
  double best_dist = (solutions[0] - reference).squaredNorm();
  for (std::size_t i = 1; i < solutions.size(); ++i) {
    const double d = (solutions[i] - reference).squaredNorm();
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return solutions[best];
}

}  // namespace expressive
