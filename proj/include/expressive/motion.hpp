#pragma once

// Composition of the full expressive motion (approach, then repeated attempt
// and rewind) and of the repeated-failure baseline.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/error.hpp"
#include "expressive/optimizer.hpp"
#include "expressive/task.hpp"

namespace expressive {

enum class Speed { kFast, kModerate, kSlow };

inline std::string_view speed_name(Speed s) {
  switch (s) {
    case Speed::kFast: return "fast";
    case Speed::kModerate: return "moderate";
    case Speed::kSlow: return "slow";
  }
  return "?";
}

inline std::optional<Speed> parse_speed(std::string_view s) {
  if (s == "fast") return Speed::kFast;
  if (s == "moderate") return Speed::kModerate;
  if (s == "slow") return Speed::kSlow;
  return std::nullopt;
}

inline constexpr int kDefaultApproachSteps = 20;

struct TimingProfile {
  // Seconds per waypoint transition.
  double fast = 0.05;
  double moderate = 0.10;
  double slow = 0.20;
  Speed attempt_speed = Speed::kFast;
  Speed rewind_speed = Speed::kModerate;
  Speed approach_speed = Speed::kModerate;
  int repetitions = 3;

  double step_duration(Speed s) const {
    switch (s) {
      case Speed::kFast: return fast;
      case Speed::kModerate: return moderate;
      case Speed::kSlow: return slow;
    }
    return moderate;
  }

  void validate() const {
    if (!(fast > 0.0 && fast < moderate && moderate < slow) || !std::isfinite(slow)) {
      throw Error(ErrorCode::kValidation,
                  "speed durations must satisfy 0 < fast < moderate < slow");
    }
    if (repetitions < 1) {
      throw Error(ErrorCode::kValidation, "repetitions must be >= 1");
    }
  }
};

enum class PhaseLabel { kApproach, kAttempt, kRewind };

inline std::string_view phase_name(PhaseLabel p) {
  switch (p) {
    case PhaseLabel::kApproach: return "approach";
    case PhaseLabel::kAttempt: return "attempt";
    case PhaseLabel::kRewind: return "rewind";
  }
  return "?";
}

inline std::optional<PhaseLabel> parse_phase(std::string_view s) {
  if (s == "approach") return PhaseLabel::kApproach;
  if (s == "attempt") return PhaseLabel::kAttempt;
  if (s == "rewind") return PhaseLabel::kRewind;
  return std::nullopt;
}

struct Phase {
  PhaseLabel label;
  Trajectory trajectory;
  double step_duration;

  double duration() const {
    return static_cast<double>(trajectory.transitions()) * step_duration;
  }
};

class MotionPlan {
 public:
  explicit MotionPlan(std::vector<Phase> phases) : phases_(std::move(phases)) {
    if (phases_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "motion plan needs at least one phase");
    }
    for (std::size_t i = 0; i < phases_.size(); ++i) {
      if (!(phases_[i].step_duration > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "phase step duration must be > 0");
      }
      if (i > 0 && phases_[i].trajectory.front() != phases_[i - 1].trajectory.back()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "phase " + std::to_string(i) +
                        " does not start where the previous phase ends");
      }
    }
    for (const auto& p : phases_) total_duration_ += p.duration();
  }

  const std::vector<Phase>& phases() const { return phases_; }
  double total_duration() const { return total_duration_; }
  const Configuration& start() const { return phases_.front().trajectory.front(); }
  const Configuration& finish() const { return phases_.back().trajectory.back(); }

 private:
  std::vector<Phase> phases_;
  double total_duration_ = 0.0;
};

namespace detail {

inline Trajectory checked_approach(const KinematicChain& chain, const Task& task,
                                   const SolveResult& result, int approach_steps) {
  if (!result.converged) {
    throw Error(ErrorCode::kInfeasible,
                "cannot compose a motion from an infeasible attempt");
  }
  if (approach_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "approach_steps must be >= 1");
  }
  Trajectory approach =
      Trajectory::interpolate(task.q_s, result.trajectory.front(), approach_steps);
  const auto report =
      is_collision_free(task.obstacles, chain, approach.waypoints(), 0.0);
  if (!report.collision_free) {
    throw Error(ErrorCode::kApproachCollision,
                "approach collides at waypoint " +
                    std::to_string(*report.first_violation) + " (signed distance " +
                    std::to_string(report.violation_distance) + ")");
  }
  return approach;
}

}  // namespace detail

/// Approach to xi*_0, then N x (attempt, reversed attempt).
inline MotionPlan compose_expressive(const KinematicChain& chain, const Task& task,
                                     const SolveResult& result,
                                     const TimingProfile& timing,
                                     int approach_steps = kDefaultApproachSteps) {
  timing.validate();
  Trajectory approach = detail::checked_approach(chain, task, result, approach_steps);
  std::vector<Phase> phases;
  phases.push_back({PhaseLabel::kApproach, std::move(approach),
                    timing.step_duration(timing.approach_speed)});
  const Trajectory rewind = result.trajectory.reversed();
  for (int i = 0; i < timing.repetitions; ++i) {
    phases.push_back({PhaseLabel::kAttempt, result.trajectory,
                      timing.step_duration(timing.attempt_speed)});
    phases.push_back(
        {PhaseLabel::kRewind, rewind, timing.step_duration(timing.rewind_speed)});
  }
  return MotionPlan(std::move(phases));
}

/// Repeated-failure baseline: approach to xi*_0, then N x (rewind the last
/// `rewind_steps` approach steps, replay them forward). rewind_steps defaults
/// to the attempt's transition count.
inline MotionPlan compose_baseline(const KinematicChain& chain, const Task& task,
                                   const SolveResult& result,
                                   const TimingProfile& timing,
                                   int approach_steps = kDefaultApproachSteps,
                                   std::optional<int> rewind_steps = std::nullopt) {
  timing.validate();
  const int steps =
      rewind_steps.value_or(static_cast<int>(result.trajectory.transitions()));
  if (steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "baseline rewind steps must be >= 1");
  }
  if (steps > approach_steps) {
    throw Error(ErrorCode::kInvalidArgument,
                "approach has " + std::to_string(approach_steps) +
                    " steps, fewer than the " + std::to_string(steps) +
                    " baseline rewind steps");
  }
  Trajectory approach = detail::checked_approach(chain, task, result, approach_steps);
  const auto tail_begin = approach.begin() + (approach.size() - 1 - steps);
  const Trajectory replay(std::vector<Configuration>(tail_begin, approach.end()));
  const Trajectory rewind = replay.reversed();
  std::vector<Phase> phases;
  phases.push_back({PhaseLabel::kApproach, std::move(approach),
                    timing.step_duration(timing.approach_speed)});
  for (int i = 0; i < timing.repetitions; ++i) {
    phases.push_back(
        {PhaseLabel::kRewind, rewind, timing.step_duration(timing.rewind_speed)});
    phases.push_back({PhaseLabel::kAttempt, replay,
                      timing.step_duration(timing.attempt_speed)});
  }
  return MotionPlan(std::move(phases));
}

struct PlanSample {
  double time;
  PhaseLabel phase;
  Configuration q;
};

/// Piecewise-linear samples at t = 0, dt, 2 dt, ...; the plan's final
/// waypoint is appended when the grid does not land on total_duration.
inline std::vector<PlanSample> sample_plan(const MotionPlan& plan, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidArgument, "sample dt must be > 0");
  }
  constexpr double kTimeEps = 1e-9;
  const double total = plan.total_duration();
  const auto& phases = plan.phases();
  const auto intervals =
      static_cast<long long>(std::floor(total / dt + kTimeEps));
  std::vector<PlanSample> out;
  out.reserve(static_cast<std::size_t>(intervals) + 2);

  std::size_t phase = 0;
  double phase_start = 0.0;
  auto sample_at = [&](double t) {
    while (phase + 1 < phases.size() &&
           t >= phase_start + phases[phase].duration() - kTimeEps) {
      phase_start += phases[phase].duration();
      ++phase;
    }
    const Phase& p = phases[phase];
    const double local = std::max(0.0, (t - phase_start) / p.step_duration);
    const auto last = static_cast<double>(p.trajectory.transitions());
    if (local >= last) return PlanSample{t, p.label, p.trajectory.back()};
    const auto i = static_cast<std::size_t>(std::floor(local));
    const double frac = local - static_cast<double>(i);
    return PlanSample{t, p.label,
                      p.trajectory[i] + frac * (p.trajectory[i + 1] - p.trajectory[i])};
  };

  for (long long i = 0; i <= intervals; ++i) {
    out.push_back(sample_at(static_cast<double>(i) * dt));
  }
  if (total - out.back().time > kTimeEps) {
    out.push_back({total, phases.back().label, plan.finish()});
  } else {
    out.back().q = plan.finish();
  }
  return out;
}

}  // namespace expressive
