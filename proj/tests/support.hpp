#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "expressive/kinematics.hpp"
#include "expressive/task_file.hpp"

namespace expressive::testing {

inline constexpr double kPi = std::numbers::pi;

/// Fixed-base two-link arm with unit links, limits +-pi.
inline KinematicChain unit_arm() {
  return KinematicChain(false, {1.0, 1.0}, {{-kPi, kPi}, {-kPi, kPi}});
}

/// Mobile base carrying two unit links.
inline KinematicChain mobile_unit_arm() {
  return KinematicChain(true, {1.0, 1.0}, {{-2.0, 2.0}, {-2.0, 2.0}, {-kPi, kPi}, {-kPi, kPi}});
}

inline Configuration vec(std::initializer_list<double> v) {
  Configuration q(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) q[i++] = x;
  return q;
}

inline Configuration random_configuration(const KinematicChain& chain, std::mt19937_64& rng) {
  Configuration q(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    const auto& lim = chain.joint_limits()[i];
    q[i] = std::uniform_real_distribution<double>(lim.lower, lim.upper)(rng);
  }
  return q;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Central differences with step h.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// ||a - n|| / ||n||; the 1e-4 floor only matters for vanishing gradients,
/// where central-difference roundoff (~1e-10) would otherwise dominate.
inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  return (analytic - numeric).norm() / std::max(1e-4, numeric.norm());
}

inline std::string task_path(const std::string& name) {
  return std::string(EXPRESSIVE_TASK_DIR) + "/" + name + ".task";
}

inline TaskBundle bundled(const std::string& name) { return parse_task_file(task_path(name)); }

}  // namespace expressive::testing
