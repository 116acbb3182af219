#pragma once

// SVG frames of a motion plan and a contact sheet of attempt snapshots.
// Coordinates are printed with fixed precision so output is byte-stable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"
#include "expressive/motion.hpp"
#include "expressive/task.hpp"

namespace expressive {

/// World-to-pixel mapping with y pointing up in the world.
struct Viewport {
  double min_x = -1.0;
  double min_y = -1.0;
  double max_x = 1.0;
  double max_y = 1.0;
  double scale = 250.0;  // pixels per metre

  double width() const { return (max_x - min_x) * scale; }
  double height() const { return (max_y - min_y) * scale; }
  double px(double x) const { return (x - min_x) * scale; }
  double py(double y) const { return (max_y - y) * scale; }

  void include(const Eigen::Vector2d& p) {
    min_x = std::min(min_x, p.x());
    min_y = std::min(min_y, p.y());
    max_x = std::max(max_x, p.x());
    max_y = std::max(max_y, p.y());
  }

  /// Bounds covering the task geometry and every listed configuration.
  static Viewport fit(const KinematicChain& chain, const Task& task,
                      const std::vector<Configuration>& configurations,
                      double margin = 0.2) {
    Viewport v;
    v.min_x = v.max_x = task.x_f.position.x();
    v.min_y = v.max_y = task.x_f.position.y();
    v.include(task.x_d.position);
    for (const auto& q : configurations) {
      for (const auto& p : chain.joint_positions(q)) v.include(p);
    }
    for (const auto& o : task.obstacles.obstacles) {
      if (const auto* c = std::get_if<Circle>(&o.shape)) {
        v.include(c->center - Eigen::Vector2d::Constant(c->radius));
        v.include(c->center + Eigen::Vector2d::Constant(c->radius));
      } else {
        const auto& b = std::get<Box>(o.shape);
        v.include(b.min);
        v.include(b.max);
      }
    }
    v.min_x -= margin;
    v.min_y -= margin;
    v.max_x += margin;
    v.max_y += margin;
    return v;
  }
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // Avoid "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void obstacles(std::ostringstream& out, const Viewport& v, const Task& task) {
  for (const auto& o : task.obstacles.obstacles) {
    if (const auto* c = std::get_if<Circle>(&o.shape)) {
      out << "<circle class=\"obstacle\" cx=\"" << num(v.px(c->center.x())) << "\" cy=\""
          << num(v.py(c->center.y())) << "\" r=\"" << num(c->radius * v.scale)
          << "\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n";
    } else {
      const auto& b = std::get<Box>(o.shape);
      out << "<rect class=\"obstacle\" x=\"" << num(v.px(b.min.x())) << "\" y=\""
          << num(v.py(b.max.y())) << "\" width=\"" << num((b.max.x() - b.min.x()) * v.scale)
          << "\" height=\"" << num((b.max.y() - b.min.y()) * v.scale)
          << "\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n";
    }
  }
}

// below_left places the label under the marker so x_f and x_d labels do not
// collide when the targets are close.
inline void marker(std::ostringstream& out, const Viewport& v, const Pose& pose,
                   std::string_view id, std::string_view color, bool below_left) {
  const double x = v.px(pose.position.x());
  const double y = v.py(pose.position.y());
  out << "<g id=\"" << id << "\" stroke=\"" << color << "\" stroke-width=\"2\">"
      << "<line x1=\"" << num(x - 6) << "\" y1=\"" << num(y - 6) << "\" x2=\""
      << num(x + 6) << "\" y2=\"" << num(y + 6) << "\"/>"
      << "<line x1=\"" << num(x - 6) << "\" y1=\"" << num(y + 6) << "\" x2=\""
      << num(x + 6) << "\" y2=\"" << num(y - 6) << "\"/>"
      << "<text x=\"" << num(below_left ? x - 8 : x + 8) << "\" y=\""
      << num(below_left ? y + 18 : y - 8) << "\" font-size=\"12\" fill=\"" << color
      << "\" stroke=\"none\"" << (below_left ? " text-anchor=\"end\"" : "") << ">" << id
      << "</text></g>\n";
}

inline void robot(std::ostringstream& out, const Viewport& v, const KinematicChain& chain,
                  const Configuration& q, std::string_view cls, double opacity,
                  bool labels) {
  const auto points = chain.joint_positions(q);
  out << "<g class=\"" << cls << "\" opacity=\"" << num(opacity) << "\">\n";
  out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"5\" "
         "stroke-linecap=\"round\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out << " ";
    out << num(v.px(points[i].x())) << "," << num(v.py(points[i].y()));
  }
  out << "\"/>\n";
  if (chain.base_mobile()) {
    const auto& b = points.front();
    out << "<rect x=\"" << num(v.px(b.x()) - 12) << "\" y=\"" << num(v.py(b.y()) - 8)
        << "\" width=\"24\" height=\"16\" fill=\"none\" stroke=\"#1f4e9c\"/>\n";
  }
  for (const auto& [bp, loc] : chain.body_points()) {
    const auto p = chain.location_position(q, loc);
    const double x = v.px(p.x());
    const double y = v.py(p.y());
    out << "<circle class=\"body-point\" id=\"" << cls << "-" << body_point_name(bp)
        << "\" cx=\"" << num(x) << "\" cy=\"" << num(y)
        << "\" r=\"4\" fill=\"#e07b00\"/>\n";
    if (labels && bp != BodyPoint::kShoulder) {
      out << "<text x=\"" << num(x + 6) << "\" y=\"" << num(y + 14)
          << "\" font-size=\"11\" fill=\"#333333\">" << body_point_name(bp) << "</text>\n";
    }
  }
  out << "</g>\n";
}

inline void scene(std::ostringstream& out, const Viewport& v, const KinematicChain& chain,
                  const Task& task, const std::optional<Configuration>& ghost,
                  const Configuration& q) {
  out << "<rect width=\"" << num(v.width()) << "\" height=\"" << num(v.height())
      << "\" fill=\"#ffffff\"/>\n";
  obstacles(out, v, task);
  marker(out, v, task.x_f, "x_f", "#c0392b", true);
  marker(out, v, task.x_d, "x_d", "#27ae60", false);
  if (ghost) robot(out, v, chain, *ghost, "ghost", 0.3, false);
  robot(out, v, chain, q, "robot", 1.0, true);
}

}  // namespace svg_detail

/// One frame: scene plus phase label and clock.
inline std::string render_frame(const KinematicChain& chain, const Task& task,
                                const Viewport& v, const Configuration& q,
                                const std::optional<Configuration>& ghost,
                                PhaseLabel phase, double time) {
  using svg_detail::num;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(v.width())
      << "\" height=\"" << num(v.height()) << "\" viewBox=\"0 0 " << num(v.width()) << " "
      << num(v.height()) << "\">\n";
  svg_detail::scene(out, v, chain, task, ghost, q);
  char clock[32];
  std::snprintf(clock, sizeof(clock), "t = %.2f s", time);
  out << "<text id=\"phase\" x=\"10\" y=\"20\" font-size=\"14\">" << phase_name(phase)
      << "</text>\n";
  out << "<text id=\"clock\" x=\"10\" y=\"38\" font-size=\"14\">" << clock << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

/// Start of the first attempt phase, shown as a translucent ghost.
inline std::optional<Configuration> attempt_start(const MotionPlan& plan) {
  for (const auto& p : plan.phases()) {
    if (p.label == PhaseLabel::kAttempt) return p.trajectory.front();
  }
  return std::nullopt;
}

inline std::size_t frame_count(std::size_t samples, int stride) {
  return std::max<std::size_t>(1, samples / static_cast<std::size_t>(stride));
}

/// Frames at every `stride`-th sample of the plan sampled at dt.
inline std::vector<std::string> render_svg(const MotionPlan& plan,
                                           const KinematicChain& chain, const Task& task,
                                           int stride, double dt = 0.02) {
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "frame stride must be >= 1");
  const auto samples = sample_plan(plan, dt);
  std::vector<Configuration> all;
  all.reserve(samples.size());
  for (const auto& s : samples) all.push_back(s.q);
  const Viewport v = Viewport::fit(chain, task, all);
  const auto ghost = attempt_start(plan);
  std::vector<std::string> frames;
  const std::size_t n = frame_count(samples.size(), stride);
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i * static_cast<std::size_t>(stride)];
    frames.push_back(render_frame(chain, task, v, s.q, ghost, s.phase, s.time));
  }
  return frames;
}

struct SheetPanel {
  std::string title;
  std::optional<Configuration> xi0;  // empty when the solve failed
  std::optional<Configuration> xiT;
  std::string note;
};

/// Grid of panels, each showing xi_0 as a ghost under xi_T.
inline std::string render_contact_sheet(const KinematicChain& chain, const Task& task,
                                        const std::vector<SheetPanel>& panels,
                                        int columns = 3) {
  using svg_detail::num;
  if (panels.empty() || columns < 1) {
    throw Error(ErrorCode::kInvalidArgument, "contact sheet needs panels and columns");
  }
  std::vector<Configuration> all = {task.q_s};
  for (const auto& p : panels) {
    if (p.xi0) all.push_back(*p.xi0);
    if (p.xiT) all.push_back(*p.xiT);
  }
  Viewport v = Viewport::fit(chain, task, all);
  v.scale = 160.0;
  constexpr double kTitle = 36.0;
  const double w = v.width();
  const double h = v.height() + kTitle;
  const int rows = static_cast<int>((panels.size() + columns - 1) / columns);
  const int cols = std::min<int>(columns, static_cast<int>(panels.size()));
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w * cols)
      << "\" height=\"" << num(h * rows) << "\">\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& p = panels[i];
    const double ox = w * static_cast<double>(i % columns);
    const double oy = h * static_cast<double>(i / columns);
    out << "<g transform=\"translate(" << num(ox) << "," << num(oy) << ")\">\n";
    out << "<text x=\"8\" y=\"16\" font-size=\"14\" font-weight=\"bold\">"
        << svg_detail::escape(p.title) << "</text>\n";
    out << "<text x=\"8\" y=\"31\" font-size=\"11\">" << svg_detail::escape(p.note)
        << "</text>\n";
    out << "<svg y=\"" << num(kTitle) << "\" width=\"" << num(w) << "\" height=\""
        << num(v.height()) << "\">\n";
    svg_detail::scene(out, v, chain, task, p.xi0, p.xiT.value_or(task.q_s));
    out << "</svg>\n";
    out << "<rect width=\"" << num(w) << "\" height=\"" << num(h)
        << "\" fill=\"none\" stroke=\"#999999\"/>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace expressive
