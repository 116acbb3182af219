#pragma once

// Plan export: a CSV sampled at fixed dt and a structured JSON document that
// keeps the phase/waypoint hierarchy and the effective task text.

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json

#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"
#include "expressive/motion.hpp"
#include "expressive/optimizer.hpp"

namespace expressive {

inline constexpr double kExportDt = 0.02;

enum class PlanVariant { kExpressive, kBaseline };

inline std::string_view variant_name(PlanVariant v) {
  return v == PlanVariant::kBaseline ? "baseline" : "expressive";
}

struct PlanHeader {
  std::string task_name;
  PlanVariant variant = PlanVariant::kExpressive;
  double objective = 0.0;
  double similarity_cost = 0.0;
  double constraint_residual = 0.0;
  double min_signed_distance = 0.0;
  // Canonical task text (serialize_task) of the effective inputs.
  std::string spec;

  static PlanHeader from_result(std::string task_name, const SolveResult& r,
                                std::string spec,
                                PlanVariant variant = PlanVariant::kExpressive) {
    return {std::move(task_name), variant,          r.objective, r.similarity_cost,
            r.constraint_residual, r.min_signed_distance, std::move(spec)};
  }
};

/// 9 significant digits, locale-independent.
inline std::string format_sig9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string export_csv(const MotionPlan& plan, const KinematicChain& chain,
                              const PlanHeader& header, double dt = kExportDt) {
  std::ostringstream out;
  out << "# task: " << header.task_name << "\n";
  out << "# variant: " << variant_name(header.variant) << "\n";
  out << "# objective: " << format_sig9(header.objective) << "\n";
  out << "# similarity_cost: " << format_sig9(header.similarity_cost) << "\n";
  out << "# constraint_residual: " << format_sig9(header.constraint_residual) << "\n";
  out << "# min_signed_distance: " << format_sig9(header.min_signed_distance) << "\n";
  out << "# total_duration: " << format_sig9(plan.total_duration()) << "\n";
  out << "# dt: " << format_sig9(dt) << "\n";
  std::istringstream spec(header.spec);
  for (std::string line; std::getline(spec, line);) {
    out << "#" << (line.empty() ? "" : " ") << line << "\n";
  }
  out << "time,phase";
  const int dof = static_cast<int>(plan.start().size());
  for (int i = 0; i < dof; ++i) out << ",q" << i;
  out << ",ee_x,ee_y\n";
  for (const auto& s : sample_plan(plan, dt)) {
    out << format_sig9(s.time) << "," << phase_name(s.phase);
    for (int i = 0; i < dof; ++i) out << "," << format_sig9(s.q[i]);
    const Pose ee = forward_kinematics(chain, s.q, BodyPoint::kEndEffector);
    out << "," << format_sig9(ee.position.x()) << "," << format_sig9(ee.position.y())
        << "\n";
  }
  return out.str();
}

inline constexpr std::string_view kPlanFormat = "expressive-plan";
inline constexpr int kPlanFormatVersion = 1;

inline std::string export_structured(const MotionPlan& plan, const PlanHeader& header) {
  nlohmann::ordered_json doc;
  doc["format"] = kPlanFormat;
  doc["version"] = kPlanFormatVersion;
  doc["header"] = {
      {"task", header.task_name},
      {"variant", variant_name(header.variant)},
      {"objective", header.objective},
      {"similarity_cost", header.similarity_cost},
      {"constraint_residual", header.constraint_residual},
      {"min_signed_distance", header.min_signed_distance},
      {"total_duration", plan.total_duration()},
      {"spec", header.spec},
  };
  auto phases = nlohmann::ordered_json::array();
  for (const auto& p : plan.phases()) {
    auto waypoints = nlohmann::ordered_json::array();
    for (const auto& q : p.trajectory) {
      waypoints.push_back(std::vector<double>(q.data(), q.data() + q.size()));
    }
    phases.push_back({{"label", phase_name(p.label)},
                      {"step_duration", p.step_duration},
                      {"waypoints", std::move(waypoints)}});
  }
  doc["phases"] = std::move(phases);
  return doc.dump(2) + "\n";
}

struct PlanDocument {
  PlanHeader header;
  MotionPlan plan;
};

inline PlanDocument parse_structured(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != kPlanFormat) {
      throw Error(ErrorCode::kParse, "not an expressive plan document");
    }
    if (doc.at("version").get<int>() != kPlanFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported plan format version");
    }
    const auto& h = doc.at("header");
    PlanHeader header;
    header.task_name = h.at("task").get<std::string>();
    const auto variant = h.at("variant").get<std::string>();
    if (variant != "expressive" && variant != "baseline") {
      throw Error(ErrorCode::kParse, "unknown plan variant '" + variant + "'");
    }
    header.variant = variant == "baseline" ? PlanVariant::kBaseline
                                           : PlanVariant::kExpressive;
    header.objective = h.at("objective").get<double>();
    header.similarity_cost = h.at("similarity_cost").get<double>();
    header.constraint_residual = h.at("constraint_residual").get<double>();
    header.min_signed_distance = h.at("min_signed_distance").get<double>();
    header.spec = h.at("spec").get<std::string>();

    std::vector<Phase> phases;
    for (const auto& p : doc.at("phases")) {
      const auto label = parse_phase(p.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::kParse, "unknown phase label");
      std::vector<Configuration> waypoints;
      for (const auto& w : p.at("waypoints")) {
        const auto v = w.get<std::vector<double>>();
        waypoints.push_back(Eigen::Map<const Eigen::VectorXd>(
            v.data(), static_cast<Eigen::Index>(v.size())));
      }
      phases.push_back({*label, Trajectory(std::move(waypoints)),
                        p.at("step_duration").get<double>()});
    }
    return {std::move(header), MotionPlan(std::move(phases))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("plan document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, std::string("plan document: ") + e.what());
  }
}

/// Fixed-width text table of a grid search, best cell marked with '*'.
inline std::string format_grid_table(const GridSearchResult& grid) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-1s %8s %8s %9s %16s %16s %12s %12s %5s\n", "",
                "lambda", "alpha", "converged", "objective", "similarity", "residual",
                "min_sd", "seed");
  out << line;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& c = grid.cells[i];
    std::snprintf(line, sizeof(line), "%-1s %8.4g %8.4g %9s %16.9g %16.9g %12.3e %12.6g %5d\n",
                  i == grid.best ? "*" : "", c.lambda, c.alpha,
                  c.result.converged ? "yes" : "no", c.result.objective,
                  c.result.similarity_cost, c.result.constraint_residual,
                  c.result.min_signed_distance, c.result.seed_index);
    out << line;
  }
  return out.str();
}

}  // namespace expressive
