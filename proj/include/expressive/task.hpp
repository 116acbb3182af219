#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"

namespace expressive {

/// An incompletable task: the end-effector starts from q_s, can reach x_f but
/// cannot progress from there to x_d.
struct Task {
  std::string name = "task";
  Configuration q_s;
  Pose x_f;
  Pose x_d;
  std::optional<Configuration> q_d;
  CollisionModel obstacles;
  bool constrain_orientation = false;

  void validate(const KinematicChain& chain) const {
    if (q_s.size() != chain.dof()) {
      throw Error(ErrorCode::kValidation,
                  "q_s has " + std::to_string(q_s.size()) + " coordinates, expected " +
                      std::to_string(chain.dof()));
    }
    if (!chain.within_limits(q_s)) {
      throw Error(ErrorCode::kValidation, "q_s violates the joint limits");
    }
    if (q_d) {
      if (q_d->size() != chain.dof()) {
        throw Error(ErrorCode::kValidation,
                    "q_d has " + std::to_string(q_d->size()) +
                        " coordinates, expected " + std::to_string(chain.dof()));
      }
      if (!chain.within_limits(*q_d)) {
        throw Error(ErrorCode::kValidation, "q_d violates the joint limits");
      }
    }
    if (!(obstacles.link_clearance >= 0.0)) {
      throw Error(ErrorCode::kValidation, "link_clearance must be >= 0");
    }
    for (const auto& [link, name] : obstacles.ignore_pairs) {
      if (link < 0 || link >= chain.num_links()) {
        throw Error(ErrorCode::kValidation,
                    "ignore pair references link " + std::to_string(link) +
                        " but the chain has " + std::to_string(chain.num_links()));
      }
      bool found = false;
      for (const auto& o : obstacles.obstacles) found = found || o.name == name;
      if (!found) {
        throw Error(ErrorCode::kValidation,
                    "ignore pair references unknown obstacle '" + name + "'");
      }
    }
  }
};

/// T + 1 waypoints of equal dimension.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Configuration> waypoints)
      : waypoints_(std::move(waypoints)) {
    if (waypoints_.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trajectory needs at least two waypoints");
    }
    for (const auto& w : waypoints_) {
      if (w.size() != waypoints_.front().size()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "trajectory waypoints differ in dimension");
      }
    }
  }

  std::size_t size() const { return waypoints_.size(); }
  std::size_t transitions() const { return waypoints_.size() - 1; }
  int dof() const { return static_cast<int>(waypoints_.front().size()); }
  const Configuration& operator[](std::size_t i) const { return waypoints_[i]; }
  const Configuration& front() const { return waypoints_.front(); }
  const Configuration& back() const { return waypoints_.back(); }
  std::span<const Configuration> waypoints() const { return waypoints_; }
  auto begin() const { return waypoints_.begin(); }
  auto end() const { return waypoints_.end(); }

  Trajectory reversed() const {
    return Trajectory(std::vector<Configuration>(waypoints_.rbegin(),
                                                 waypoints_.rend()));
  }

  /// `steps` equal joint-space steps from `from` to `to`.
  static Trajectory interpolate(const Configuration& from, const Configuration& to,
                                int steps) {
    if (steps < 1) {
      throw Error(ErrorCode::kInvalidArgument, "interpolation needs >= 1 step");
    }
    std::vector<Configuration> w;
    w.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
      if (i == steps) {
        w.push_back(to);
      } else {
        const double s = static_cast<double>(i) / steps;
        w.push_back(from + s * (to - from));
      }
    }
    return Trajectory(std::move(w));
  }

 private:
  std::vector<Configuration> waypoints_;
};

}  // namespace expressive
