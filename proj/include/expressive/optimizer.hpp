#pragma once

/**
 * @file optimizer.hpp
 * @brief Attempt-trajectory optimization.
 *
 * Minimizes (c + alpha) + smoothness / lambda over waypoints 1..T with the
 * first waypoint pinned to an inverse-kinematics solution at the failure pose.
 * The end-effector constraint and collision freedom enter as quadratic
 * penalties whose weight ramps geometrically; every waypoint is projected back
 * onto the end-effector constraint after the last outer iteration.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/costs.hpp"
#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"
#include "expressive/task.hpp"

namespace expressive {

struct PenaltySchedule {
  double initial_weight = 10.0;
  double growth = 10.0;
  int outer_iterations = 6;
};

struct SolveOptions {
  int T = 10;  ///< transitions; the trajectory holds T + 1 waypoints
  PenaltySchedule penalty;
  int max_inner_iterations = 500;
  double gradient_tolerance = 1e-6;
  double constraint_tolerance = 1e-4;
  double collision_margin = 0.0;
  std::uint64_t rng_seed = 0;
  /// Evaluate non-base body points with the base held at xi0 inside the costs.
  bool fixed_base_costs = true;

  void validate() const {
    if (T < 2) throw Error(ErrorCode::kValidation, "T must be >= 2");
    if (!(penalty.initial_weight > 0.0)) {
      throw Error(ErrorCode::kValidation, "penalty initial weight must be > 0");
    }
    if (!(penalty.growth >= 1.0)) {
      throw Error(ErrorCode::kValidation, "penalty growth must be >= 1");
    }
    if (penalty.outer_iterations < 1) {
      throw Error(ErrorCode::kValidation, "outer_iterations must be >= 1");
    }
    if (max_inner_iterations < 1) {
      throw Error(ErrorCode::kValidation, "max_inner_iterations must be >= 1");
    }
    if (!(gradient_tolerance > 0.0) || !(constraint_tolerance > 0.0)) {
      throw Error(ErrorCode::kValidation, "tolerances must be > 0");
    }
    if (!(collision_margin >= 0.0) || !std::isfinite(collision_margin)) {
      throw Error(ErrorCode::kValidation, "collision_margin must be >= 0");
    }
  }
};

struct SolveResult {
  Trajectory trajectory;
  double objective = 0.0;        ///< (c + alpha) + smoothness / lambda
  double similarity_cost = 0.0;  ///< c alone
  double constraint_residual = 0.0;
  double min_signed_distance = kNoObstacleDistance;
  int seed_index = -1;
  int num_seeds = 0;
  bool converged = false;
  std::optional<Configuration> desired_configuration;
};

/// Slack below collision_margin tolerated by the feasibility check.
inline constexpr double kCollisionSlack = 1e-6;
/// The collision penalty activates this far above the margin so that the
/// quadratic penalty's residual violation lands on the free side.
inline constexpr double kCollisionPenaltyBuffer = 1e-3;

/// q_d if the task provides it, otherwise the x_d IK solution closest to xi0.
inline Configuration desired_configuration(const KinematicChain& chain,
                                           const Task& task,
                                           const Configuration& xi0) {
  if (task.q_d) return *task.q_d;
  return closest_ik(chain, task.x_d, xi0, task.constrain_orientation);
}

namespace detail {

/// Penalized objective over the free waypoints, stored as rows of a T x dof
/// matrix (row t - 1 holds waypoint t).
class AttemptProblem {
 public:
  AttemptProblem(const KinematicChain& chain, const Task& task, const CostSpec& spec,
                 const SolveOptions& options, CostContext context)
      : chain_(chain),
        task_(task),
        spec_(spec),
        options_(options),
        context_(std::move(context)) {}

  double penalty_weight = 1.0;

  const CostContext& context() const { return context_; }
  void set_metric(const DistanceMetric& metric) { spec_.metric = metric; }

  std::vector<Configuration> waypoints(const Eigen::MatrixXd& x) const {
    std::vector<Configuration> w;
    w.reserve(x.rows() + 1);
    w.push_back(context_.xi0);
    for (Eigen::Index t = 0; t < x.rows(); ++t) w.push_back(x.row(t).transpose());
    return w;
  }

  double evaluate(const Eigen::MatrixXd& x, Eigen::MatrixXd* grad) const {
    const Eigen::Index rows = x.rows();
    const double inv_lambda = 1.0 / spec_.lambda;
    if (grad) grad->setZero(rows, x.cols());

    const Configuration last = x.row(rows - 1).transpose();
    double value = similarity_cost(spec_, chain_, context_, last) + spec_.alpha;
    if (grad) {
      grad->row(rows - 1) += similarity_gradient(spec_, chain_, context_, last).transpose();
    }

    for (Eigen::Index t = 0; t < rows; ++t) {
      const Eigen::RowVectorXd prev = t == 0 ? Eigen::RowVectorXd(context_.xi0.transpose())
                                             : Eigen::RowVectorXd(x.row(t - 1));
      const Eigen::RowVectorXd step = x.row(t) - prev;
      value += inv_lambda * step.squaredNorm();
      if (grad) {
        grad->row(t) += 2.0 * inv_lambda * step;
        if (t > 0) grad->row(t - 1) -= 2.0 * inv_lambda * step;
      }
    }

    const double mu = penalty_weight;
    const double threshold = options_.collision_margin + kCollisionPenaltyBuffer;
    for (Eigen::Index t = 0; t < rows; ++t) {
      const Configuration q = x.row(t).transpose();
      const Pose ee = forward_kinematics(chain_, q, BodyPoint::kEndEffector);
      const Eigen::Vector2d err = ee.position - task_.x_f.position;
      value += mu * err.squaredNorm();
      if (grad) {
        grad->row(t) += (2.0 * mu *
                         (body_jacobian(chain_, q, BodyPoint::kEndEffector).transpose() * err))
                            .transpose();
      }
      if (task_.constrain_orientation) {
        const double angle_err = normalize_angle(ee.orientation - task_.x_f.orientation);
        value += mu * angle_err * angle_err;
        if (grad) {
          grad->row(t).tail(chain_.num_links()).array() += 2.0 * mu * angle_err;
        }
      }
      for (const auto& pair :
           pair_distances(task_.obstacles, chain_, q, grad != nullptr)) {
        const double violation = threshold - pair.distance;
        if (violation <= 0.0) continue;
        value += mu * violation * violation;
        if (grad) grad->row(t) -= (2.0 * mu * violation * pair.gradient).transpose();
      }
    }
    return value;
  }

  Eigen::MatrixXd clamp(Eigen::MatrixXd x) const {
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (int j = 0; j < chain_.dof(); ++j) {
        x(t, j) = chain_.joint_limits()[j].clamp(x(t, j));
      }
    }
    return x;
  }

  /// Gradient with components that push against an active bound removed.
  Eigen::MatrixXd projected_gradient(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& grad) const {
    Eigen::MatrixXd pg = grad;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (int j = 0; j < chain_.dof(); ++j) {
        const auto& lim = chain_.joint_limits()[j];
        if ((x(t, j) <= lim.lower && grad(t, j) > 0.0) ||
            (x(t, j) >= lim.upper && grad(t, j) < 0.0)) {
          pg(t, j) = 0.0;
        }
      }
    }
    return pg;
  }

 private:
  const KinematicChain& chain_;
  const Task& task_;
  CostSpec spec_;
  const SolveOptions& options_;
  CostContext context_;
};

/// Projected gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking. Accepted iterates never increase the objective; `history`
/// receives the objective after every accepted step.
inline Eigen::MatrixXd minimize_penalized(const AttemptProblem& problem,
                                          Eigen::MatrixXd x, int max_iterations,
                                          double gradient_tolerance,
                                          std::vector<double>* history = nullptr) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  Eigen::MatrixXd grad;
  double f = problem.evaluate(x, &grad);
  if (history) history->push_back(f);
  double step = 1e-2 / std::max(1.0, grad.cwiseAbs().maxCoeff());
  Eigen::MatrixXd grad_new;
  for (int it = 0; it < max_iterations; ++it) {
    if (problem.projected_gradient(x, grad).norm() <= gradient_tolerance) break;
    double trial = step;
    bool accepted = false;
    Eigen::MatrixXd x_new;
    double f_new = 0.0;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      x_new = problem.clamp(x - trial * grad);
      const double decrease = grad.cwiseProduct(x - x_new).sum();
      if (decrease <= 0.0) break;
      f_new = problem.evaluate(x_new, nullptr);
      if (f_new <= f - kArmijo * decrease) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;
    problem.evaluate(x_new, &grad_new);
    const Eigen::MatrixXd s = x_new - x;
    const double sy = s.cwiseProduct(grad_new - grad).sum();
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * trial;
    step = std::clamp(step, 1e-12, 1e6);
    x = std::move(x_new);
    grad = grad_new;
    f = f_new;
    if (history) history->push_back(f);
  }
  return x;
}

/// Position error at x_f, plus the wrapped heading error when constrained.
inline double ee_residual(const KinematicChain& chain, const Configuration& q,
                          const Task& task) {
  return ik::ee_residual(chain, q, task.x_f, task.constrain_orientation).error.norm();
}

}  // namespace detail

/// Solves from a single attempt start xi0. seed_index is left at -1.
inline SolveResult solve_from_seed(const KinematicChain& chain, const Task& task,
                                   const CostSpec& spec, const SolveOptions& options,
                                   const Configuration& xi0) {
  chain.check_dimension(xi0);
  CostContext ctx{xi0, std::nullopt, task.x_f, task.x_d, options.fixed_base_costs};
  if (spec.cost_kind != CostKind::kEmulateEndEffector) {
    ctx.qd = desired_configuration(chain, task, xi0);
  }
  detail::AttemptProblem problem(chain, task, spec, options, ctx);

  Eigen::MatrixXd x(options.T, chain.dof());
  for (int t = 0; t < options.T; ++t) x.row(t) = xi0.transpose();

  // Zero displacement is a stationary point of proj, so the first outer
  // iteration runs with the dot product (proj at k = 1) to leave the constant
  // start; later iterations use the requested metric.
  const bool continuation = spec.metric.kind == MetricKind::kProj;
  problem.penalty_weight = options.penalty.initial_weight;
  for (int outer = 0; outer < options.penalty.outer_iterations; ++outer) {
    if (continuation) {
      problem.set_metric(outer == 0 ? DistanceMetric{MetricKind::kDot, 1} : spec.metric);
    }
    x = detail::minimize_penalized(problem, std::move(x), options.max_inner_iterations,
                                   options.gradient_tolerance);
    problem.penalty_weight *= options.penalty.growth;
  }

  std::vector<Configuration> waypoints = problem.waypoints(x);
  for (std::size_t t = 1; t < waypoints.size(); ++t) {
    waypoints[t] = ik::refine(chain, waypoints[t], task.x_f, task.constrain_orientation);
  }
  Trajectory trajectory(std::move(waypoints));

  double residual = 0.0;
  double min_sd = kNoObstacleDistance;
  for (const auto& w : trajectory) {
    residual = std::max(residual, detail::ee_residual(chain, w, task));
    min_sd = std::min(min_sd, signed_distance(task.obstacles, chain, w));
  }
  const double similarity = similarity_cost(spec, chain, ctx, trajectory.back());
  const double objective = total_objective(spec, chain, trajectory.waypoints(), ctx);
  const bool feasible = residual <= options.constraint_tolerance &&
                        min_sd >= options.collision_margin - kCollisionSlack &&
                        std::isfinite(objective);
  SolveResult result{std::move(trajectory), objective, similarity, residual, min_sd,
                     -1, 1, feasible, ctx.qd};
  return result;
}

/// Multi-start solve over every IK solution at the failure pose. Returns the
/// feasible result with the lowest objective, or the best infeasible one with
/// converged = false.
inline SolveResult solve_attempt(const KinematicChain& chain, const Task& task,
                                 const CostSpec& spec, const SolveOptions& options) {
  options.validate();
  spec.validate(chain);
  task.validate(chain);
  const auto seeds = ik_solutions(chain, task.x_f, task.constrain_orientation);
  if (seeds.empty()) {
    throw Error(ErrorCode::kUnreachableTarget,
                "failure pose x_f = (" + std::to_string(task.x_f.position.x()) + ", " +
                    std::to_string(task.x_f.position.y()) + ") is unreachable");
  }
  std::optional<SolveResult> best;
  auto better = [](const SolveResult& a, const SolveResult& b) {
    if (a.converged != b.converged) return a.converged;
    return a.objective < b.objective;
  };
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::optional<SolveResult> candidate;
    if (signed_distance(task.obstacles, chain, seeds[i]) <
        options.collision_margin - kCollisionSlack) {
      // Attempt start already in collision: nothing to optimize.
      Trajectory constant(std::vector<Configuration>(options.T + 1, seeds[i]));
      CostContext ctx{seeds[i], std::nullopt, task.x_f, task.x_d,
                      options.fixed_base_costs};
      if (spec.cost_kind != CostKind::kEmulateEndEffector) {
        ctx.qd = desired_configuration(chain, task, seeds[i]);
      }
      const double objective = total_objective(spec, chain, constant.waypoints(), ctx);
      candidate = SolveResult{constant,
                              objective,
                              similarity_cost(spec, chain, ctx, seeds[i]),
                              detail::ee_residual(chain, seeds[i], task),
                              signed_distance(task.obstacles, chain, seeds[i]),
                              -1,
                              1,
                              false,
                              ctx.qd};
    } else {
      candidate = solve_from_seed(chain, task, spec, options, seeds[i]);
    }
    candidate->seed_index = static_cast<int>(i);
    if (!best || better(*candidate, *best)) best = std::move(candidate);
  }
  best->num_seeds = static_cast<int>(seeds.size());
  return *best;
}

struct GridCell {
  double lambda;
  double alpha;
  SolveResult result;
};

struct GridSearchResult {
  std::vector<GridCell> cells;  ///< lambda-major order
  std::size_t best = 0;

  const GridCell& best_cell() const { return cells[best]; }
};

inline const std::vector<double> kDefaultLambdaGrid = {10, 20, 40, 80, 160};
inline const std::vector<double> kDefaultAlphaGrid = {0, 0.3, 0.6, 1.0, 2.0};

/// Solves every (lambda, alpha) pair and selects the feasible cell with the
/// lowest objective; ties go to the smaller lambda, then the smaller alpha.
inline GridSearchResult grid_search(const KinematicChain& chain, const Task& task,
                                    const CostSpec& base,
                                    std::span<const double> lambdas,
                                    std::span<const double> alphas,
                                    const SolveOptions& options) {
  if (lambdas.empty() || alphas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "grid_search needs non-empty grids");
  }
  GridSearchResult out;
  for (double lambda : lambdas) {
    for (double alpha : alphas) {
      CostSpec spec = base;
      spec.lambda = lambda;
      spec.alpha = alpha;
      out.cells.push_back({lambda, alpha, solve_attempt(chain, task, spec, options)});
    }
  }
  auto ranks_before = [](const GridCell& a, const GridCell& b) {
    if (a.result.converged != b.result.converged) return a.result.converged;
    if (a.result.objective != b.result.objective) {
      return a.result.objective < b.result.objective;
    }
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.alpha < b.alpha;
  };
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    if (ranks_before(out.cells[i], out.cells[out.best])) out.best = i;
  }
  return out;
}

}  // namespace expressive
