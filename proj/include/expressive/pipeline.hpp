#pragma once

// Orchestration shared by the command-line tool and the tests: applying flag
// overrides to a task bundle, solving and composing, and the invariant checks
// behind `check`.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/costs.hpp"
#include "expressive/export.hpp"
#include "expressive/motion.hpp"
#include "expressive/optimizer.hpp"
#include "expressive/task_file.hpp"

namespace expressive {

struct Overrides {
  std::optional<CostKind> cost;
  std::optional<MetricKind> metric;
  std::optional<int> k;
  std::optional<double> lambda;
  std::optional<double> alpha;
};

/// Applies overrides and re-validates. Changing the cost kind resets the body
/// points to that cost's defaults.
inline TaskBundle apply_overrides(TaskBundle b, const Overrides& o) {
  if (o.cost && *o.cost != b.cost.cost_kind) {
    b.cost.cost_kind = *o.cost;
    b.cost.body_points = CostSpec::default_body_points(*o.cost, b.chain);
  }
  if (o.metric) b.cost.metric.kind = *o.metric;
  if (o.k) b.cost.metric.k = *o.k;
  if (o.lambda) b.cost.lambda = *o.lambda;
  if (o.alpha) b.cost.alpha = *o.alpha;
  b.cost.metric.validate();
  b.cost.validate(b.chain);
  return b;
}

struct SolvedPlan {
  SolveResult result;
  MotionPlan plan;
  PlanHeader header;
};

inline SolvedPlan solve_and_compose(const TaskBundle& b, bool baseline = false) {
  SolveResult result = solve_attempt(b.chain, b.task, b.cost, b.solve);
  if (!result.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "no seed produced a feasible attempt (best residual %.3g, min signed "
                  "distance %.3g)",
                  result.constraint_residual, result.min_signed_distance);
    throw Error(ErrorCode::kInfeasible, buf);
  }
  MotionPlan plan = baseline
                        ? compose_baseline(b.chain, b.task, result, b.timing, b.approach_steps)
                        : compose_expressive(b.chain, b.task, result, b.timing,
                                             b.approach_steps);
  PlanHeader header = PlanHeader::from_result(
      b.task.name, result, serialize_task(b),
      baseline ? PlanVariant::kBaseline : PlanVariant::kExpressive);
  return {std::move(result), std::move(plan), std::move(header)};
}

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

namespace check_detail {

inline std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

inline bool same_waypoints(const Trajectory& a, const Trajectory& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    if (tol == 0.0 ? a[i] != b[i] : (a[i] - b[i]).lpNorm<Eigen::Infinity>() > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace check_detail

/// Invariants of a solved expressive plan.
inline std::vector<CheckLine> check_invariants(const TaskBundle& b, const SolvedPlan& s) {
  using check_detail::fmt;
  std::vector<CheckLine> out;
  const auto& xi = s.result.trajectory;
  const auto& chain = b.chain;

  double worst = 0.0;
  for (const auto& q : xi) {
    worst = std::max(worst, detail::ee_residual(chain, q, b.task));
  }
  out.push_back({"ee_pinned", worst <= b.solve.constraint_tolerance,
                 fmt("max ee residual %.3e (tolerance %.1e)", worst,
                     b.solve.constraint_tolerance)});

  bool limits = true;
  for (const auto& q : xi) limits = limits && chain.within_limits(q, 1e-12);
  out.push_back({"joint_limits", limits, limits ? "all waypoints within limits"
                                                : "a waypoint violates its limits"});

  double min_sd = kNoObstacleDistance;
  for (const auto& q : xi) {
    min_sd = std::min(min_sd, signed_distance(b.task.obstacles, chain, q));
  }
  out.push_back({"collision_free", min_sd >= b.solve.collision_margin - kCollisionSlack,
                 fmt("min signed distance %.6g (margin %.3g)", min_sd,
                     b.solve.collision_margin)});

  CostContext ctx{xi.front(), s.result.desired_configuration, b.task.x_f, b.task.x_d,
                  b.solve.fixed_base_costs};
  const double objective = total_objective(b.cost, chain, xi.waypoints(), ctx);
  const double gap = std::abs(objective - s.result.objective);
  out.push_back({"objective_consistent", gap <= 1e-9 * std::max(1.0, std::abs(objective)),
                 fmt("recomputed %.12g vs reported %.12g", objective, s.result.objective)});

  const auto& phases = s.plan.phases();
  const int n = b.timing.repetitions;
  bool structure = phases.size() == static_cast<std::size_t>(1 + 2 * n) &&
                   phases.front().label == PhaseLabel::kApproach;
  for (int r = 0; structure && r < n; ++r) {
    const auto& attempt = phases[1 + 2 * r];
    const auto& rewind = phases[2 + 2 * r];
    structure = attempt.label == PhaseLabel::kAttempt &&
                rewind.label == PhaseLabel::kRewind &&
                check_detail::same_waypoints(attempt.trajectory, xi, 0.0) &&
                check_detail::same_waypoints(rewind.trajectory, xi.reversed(), 0.0);
  }
  out.push_back({"plan_structure", structure,
                 "approach + " + std::to_string(n) + " x (attempt, exact rewind)"});

  bool chained = phases.front().trajectory.front() == b.task.q_s &&
                 phases.front().trajectory.back() == xi.front();
  for (std::size_t i = 1; i < phases.size(); ++i) {
    chained = chained && phases[i].trajectory.front() == phases[i - 1].trajectory.back();
  }
  out.push_back({"endpoint_chaining", chained, "phases start where the previous ends"});

  if (structure) {
    const double ta = phases[1].duration();
    const double tr = phases[2].duration();
    out.push_back({"attempt_faster_than_rewind", ta < tr,
                   fmt("attempt %.3f s, rewind %.3f s", ta, tr)});
  }

  double approach_sd = kNoObstacleDistance;
  for (const auto& q : phases.front().trajectory) {
    approach_sd = std::min(approach_sd, signed_distance(b.task.obstacles, chain, q));
  }
  out.push_back({"approach_collision_free", approach_sd >= 0.0,
                 fmt("min signed distance %.6g", approach_sd)});

  const std::string csv1 = export_csv(s.plan, chain, s.header);
  const std::string csv2 = export_csv(s.plan, chain, s.header);
  const std::string js1 = export_structured(s.plan, s.header);
  const std::string js2 = export_structured(s.plan, s.header);
  out.push_back({"export_deterministic", csv1 == csv2 && js1 == js2,
                 "two exports of the same plan are byte-identical"});

  const auto doc = parse_structured(js1);
  double err = 0.0;
  bool shape = doc.plan.phases().size() == phases.size();
  for (std::size_t i = 0; shape && i < phases.size(); ++i) {
    const auto& a = phases[i].trajectory;
    const auto& c = doc.plan.phases()[i].trajectory;
    shape = a.size() == c.size();
    for (std::size_t j = 0; shape && j < a.size(); ++j) {
      err = std::max(err, (a[j] - c[j]).lpNorm<Eigen::Infinity>());
    }
  }
  out.push_back({"structured_round_trip", shape && err <= 1e-9,
                 fmt("max waypoint error %.3e", err)});
  return out;
}

}  // namespace expressive
