#pragma once

// Reader and canonical writer for the sectioned key/value task format
// (grammar in docs/task_format.md). Parsing only throws expressive::Error:
// kParse for syntax, kValidation for bad values, both prefixed "<source>:<line>:".

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "expressive/collision.hpp"
#include "expressive/costs.hpp"
#include "expressive/error.hpp"
#include "expressive/kinematics.hpp"
#include "expressive/motion.hpp"
#include "expressive/optimizer.hpp"
#include "expressive/task.hpp"

namespace expressive {

/// Everything a task file describes.
struct TaskBundle {
  KinematicChain chain = KinematicChain::default_chain();
  Task task;
  CostSpec cost;
  SolveOptions solve;
  TimingProfile timing;
  int approach_steps = kDefaultApproachSteps;

  void validate() const {
    task.validate(chain);
    cost.validate(chain);
    solve.validate();
    timing.validate();
    if (approach_steps < 1) {
      throw Error(ErrorCode::kValidation, "approach_steps must be >= 1");
    }
  }
};

namespace task_file {

struct Value {
  enum class Kind { kNumber, kBool, kWord, kString, kList };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<Value> items;
};

struct Entry {
  Value value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"chain", {"base_mobile", "link_lengths", "joint_limits"}},
      {"chain.body_points", {"ba", "sh", "el", "ee"}},
      {"task", {"name", "q_s", "x_f", "x_d", "q_d", "constrain_orientation"}},
      {"collision", {"link_clearance"}},
      {"obstacle", {"name", "shape", "center", "radius", "min", "max", "ignore_links"}},
      {"cost", {"cost", "metric", "k", "lambda", "alpha", "body_points"}},
      {"solve",
       {"waypoints", "penalty_initial", "penalty_growth", "outer_iterations",
        "max_inner_iterations", "gradient_tolerance", "constraint_tolerance",
        "collision_margin", "rng_seed", "fixed_base_costs"}},
      {"timing",
       {"fast", "moderate", "slow", "attempt_speed", "rewind_speed", "approach_speed",
        "repetitions", "approach_steps"}},
  };
  return keys;
}

class Parser {
 public:
  Parser(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  std::vector<Section> parse() {
    std::vector<Section> sections;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t eol = std::min(text_.find('\n', pos), text_.size());
      ++line_no;
      line_ = line_no;
      std::string_view line = text_.substr(pos, eol - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      cursor_ = line;
      skip_space();
      if (!cursor_.empty() && cursor_.front() != '#') {
        if (cursor_.front() == '[') {
          cursor_.remove_prefix(1);
          std::string name = read_section_name();
          expect(']');
          end_of_line();
          if (!known_keys().contains(name)) fail("unknown section [" + name + "]");
          if (name != "obstacle" && !seen.insert(name).second) {
            fail("duplicate section [" + name + "]");
          }
          sections.push_back({name, line_no, {}});
        } else {
          if (sections.empty()) fail("key outside of any section");
          std::string key = read_identifier();
          if (key.empty()) fail("expected a key");
          skip_space();
          expect('=');
          skip_space();
          Value value = read_value(0);
          end_of_line();
          Section& section = sections.back();
          if (!known_keys().at(section.name).contains(key)) {
            fail("unknown key '" + key + "' in [" + section.name + "]");
          }
          if (section.entries.contains(key)) fail("duplicate key '" + key + "'");
          section.entries[key] = {std::move(value), line_no};
        }
      }
      if (eol == text_.size()) break;
      pos = eol + 1;
    }
    return sections;
  }

 private:
  static constexpr int kMaxNesting = 4;

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::kParse,
                source_ + ":" + std::to_string(line_) + ": " + message);
  }

  void skip_space() {
    while (!cursor_.empty() && (cursor_.front() == ' ' || cursor_.front() == '\t')) {
      cursor_.remove_prefix(1);
    }
  }

  void expect(char c) {
    if (cursor_.empty() || cursor_.front() != c) {
      fail(std::string("expected '") + c + "'");
    }
    cursor_.remove_prefix(1);
  }

  void end_of_line() {
    skip_space();
    if (!cursor_.empty() && cursor_.front() != '#') fail("unexpected trailing text");
  }

  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  }

  std::string read_identifier() {
    std::size_t n = 0;
    while (n < cursor_.size() && ident_char(cursor_[n])) ++n;
    std::string out(cursor_.substr(0, n));
    cursor_.remove_prefix(n);
    return out;
  }

  std::string read_section_name() {
    std::size_t n = 0;
    while (n < cursor_.size() && (ident_char(cursor_[n]) || cursor_[n] == '.')) ++n;
    if (n == 0) fail("expected a section name");
    std::string out(cursor_.substr(0, n));
    cursor_.remove_prefix(n);
    return out;
  }

  Value read_value(int depth) {
    if (cursor_.empty() || cursor_.front() == '#') fail("expected a value");
    const char c = cursor_.front();
    Value v;
    if (c == '[') {
      if (depth >= kMaxNesting) fail("lists nested too deeply");
      cursor_.remove_prefix(1);
      v.kind = Value::Kind::kList;
      skip_space();
      if (!cursor_.empty() && cursor_.front() == ']') {
        cursor_.remove_prefix(1);
        return v;
      }
      while (true) {
        skip_space();
        v.items.push_back(read_value(depth + 1));
        skip_space();
        if (!cursor_.empty() && cursor_.front() == ',') {
          cursor_.remove_prefix(1);
          continue;
        }
        expect(']');
        return v;
      }
    }
    if (c == '"') {
      cursor_.remove_prefix(1);
      const std::size_t close = cursor_.find('"');
      if (close == std::string_view::npos) fail("unterminated string");
      v.kind = Value::Kind::kString;
      v.text = std::string(cursor_.substr(0, close));
      cursor_.remove_prefix(close + 1);
      return v;
    }
    if (c == '-' || c == '+' || c == '.' || (c >= '0' && c <= '9')) {
      std::size_t n = 0;
      while (n < cursor_.size() &&
             (ident_char(cursor_[n]) || cursor_[n] == '.' || cursor_[n] == '+')) {
        ++n;
      }
      std::string_view token = cursor_.substr(0, n);
      if (!token.empty() && token.front() == '+') token.remove_prefix(1);
      double number = 0.0;
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), number);
      if (ec != std::errc() || ptr != token.data() + token.size() ||
          !std::isfinite(number)) {
        fail("invalid number '" + std::string(cursor_.substr(0, n)) + "'");
      }
      cursor_.remove_prefix(n);
      v.kind = Value::Kind::kNumber;
      v.number = number;
      return v;
    }
    std::string word = read_identifier();
    if (word.empty()) fail(std::string("unexpected character '") + c + "'");
    if (word == "true" || word == "false") {
      v.kind = Value::Kind::kBool;
      v.boolean = word == "true";
    } else {
      v.kind = Value::Kind::kWord;
      v.text = std::move(word);
    }
    return v;
  }

  std::string_view text_;
  std::string source_;
  std::string_view cursor_;
  int line_ = 0;
};

/// Typed, context-aware access to a parsed section.
class Reader {
 public:
  Reader(const Section* section, std::string source)
      : section_(section), source_(std::move(source)) {}

  bool present() const { return section_ != nullptr; }
  bool has(const std::string& key) const {
    return section_ && section_->entries.contains(key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const int line = section_ ? (section_->entries.contains(key)
                                     ? section_->entries.at(key).line
                                     : section_->line)
                              : 0;
    const std::string where = section_ ? section_->name + "." + key : key;
    throw Error(ErrorCode::kValidation,
                source_ + ":" + std::to_string(line) + ": " + where + ": " + message);
  }

  /// Runs fn, re-throwing validation errors with this key's location.
  template <typename Fn>
  auto guarded(const std::string& key, Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse) throw;
      fail(key, e.what());
    }
  }

  const Value& get(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key");
    return section_->entries.at(key).value;
  }

  double number(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::kNumber) fail(key, "expected a number");
    return v.number;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(get(key), key) : fallback;
  }

  long long integer(const std::string& key, long long fallback, long long lo,
                    long long hi) const {
    if (!has(key)) return fallback;
    const double v = number(get(key), key);
    if (v != std::floor(v) || v < static_cast<double>(lo) ||
        v > static_cast<double>(hi)) {
      fail(key, "expected an integer in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
    }
    return static_cast<long long>(v);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = get(key);
    if (v.kind != Value::Kind::kBool) fail(key, "expected true or false");
    return v.boolean;
  }

  std::string word(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::kWord && v.kind != Value::Kind::kString) {
      fail(key, "expected a name");
    }
    return v.text;
  }

  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? word(get(key), key) : fallback;
  }

  std::vector<double> numbers(const Value& v, const std::string& key) const {
    if (v.kind != Value::Kind::kList) fail(key, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& item : v.items) out.push_back(number(item, key));
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    return numbers(get(key), key);
  }

  Configuration configuration(const std::string& key) const {
    const auto values = numbers(key);
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
  }

  Eigen::Vector2d point(const std::string& key) const {
    const auto values = numbers(key);
    if (values.size() != 2) fail(key, "expected [x, y]");
    return {values[0], values[1]};
  }

  Pose pose(const std::string& key) const {
    const auto values = numbers(key);
    if (values.size() != 2 && values.size() != 3) {
      fail(key, "expected [x, y] or [x, y, theta]");
    }
    return Pose(values[0], values[1], values.size() == 3 ? values[2] : 0.0);
  }

 private:
  const Section* section_;
  std::string source_;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::string format_list(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out + "]";
}

inline std::string format_configuration(const Configuration& q) {
  return format_list(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

inline std::string format_pose(const Pose& p) {
  const std::vector<double> v = {p.position.x(), p.position.y(), p.orientation};
  return format_list(v);
}

inline KinematicChain read_chain(const Reader& chain, const Reader& points) {
  if (!chain.present() && !points.present()) return KinematicChain::default_chain();
  const bool mobile = chain.boolean("base_mobile", true);
  std::vector<double> lengths = {0.5, 0.4, 0.3};
  if (chain.has("link_lengths")) lengths = chain.numbers("link_lengths");
  const int dof = static_cast<int>(lengths.size()) + (mobile ? 2 : 0);
  std::vector<JointLimit> limits;
  if (chain.has("joint_limits")) {
    const Value& v = chain.get("joint_limits");
    if (v.kind != Value::Kind::kList) chain.fail("joint_limits", "expected a list");
    for (const auto& item : v.items) {
      const auto pair = chain.numbers(item, "joint_limits");
      if (pair.size() != 2) chain.fail("joint_limits", "expected [lower, upper] pairs");
      limits.push_back({pair[0], pair[1]});
    }
  } else {
    for (int i = 0; i < dof; ++i) {
      if (mobile && i < 2) {
        limits.push_back({-1.0, 1.0});
      } else {
        limits.push_back({-std::numbers::pi, std::numbers::pi});
      }
    }
  }
  std::map<BodyPoint, int> body_points;
  for (const char* name : {"ba", "sh", "el", "ee"}) {
    if (!points.has(name)) continue;
    const Value& v = points.get(name);
    int loc = 0;
    if (v.kind == Value::Kind::kWord && v.text == "base") {
      loc = kBaseLocation;
    } else {
      loc = static_cast<int>(points.integer(name, 0, 0, 1000));
    }
    body_points[*parse_body_point(name)] = loc;
  }
  return chain.guarded("link_lengths", [&] {
    return KinematicChain(mobile, lengths, limits, body_points);
  });
}

inline Obstacle read_obstacle(const Reader& r, std::size_t index,
                              std::vector<int>* ignore_links) {
  const std::string name = r.word("name", "obstacle" + std::to_string(index));
  const std::string shape = r.word("shape", "circle");
  if (r.has("ignore_links")) {
    for (double v : r.numbers("ignore_links")) {
      if (v != std::floor(v) || v < 0 || v > 1000) {
        r.fail("ignore_links", "expected link indices");
      }
      ignore_links->push_back(static_cast<int>(v));
    }
  }
  if (shape == "circle") {
    if (r.has("min") || r.has("max")) r.fail("shape", "circle takes center and radius");
    const Eigen::Vector2d center = r.point("center");
    const double radius = r.number(r.get("radius"), "radius");
    return r.guarded("radius", [&] { return Obstacle::circle(name, center, radius); });
  }
  if (shape == "box") {
    if (r.has("center") || r.has("radius")) r.fail("shape", "box takes min and max");
    const Eigen::Vector2d lo = r.point("min");
    const Eigen::Vector2d hi = r.point("max");
    return r.guarded("max", [&] { return Obstacle::box(name, lo, hi); });
  }
  r.fail("shape", "expected circle or box");
}

inline std::optional<Speed> read_speed(const Reader& r, const std::string& key,
                                       Speed fallback) {
  if (!r.has(key)) return fallback;
  const auto s = parse_speed(r.word(r.get(key), key));
  if (!s) r.fail(key, "expected fast, moderate or slow");
  return s;
}

}  // namespace task_file

inline TaskBundle parse_task_text(std::string_view text,
                                  const std::string& source = "<task>") {
  using namespace task_file;
  const std::vector<Section> sections = Parser(text, source).parse();
  auto find = [&](const std::string& name) -> const Section* {
    for (const auto& s : sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };
  const Reader chain_reader(find("chain"), source);
  const Reader points_reader(find("chain.body_points"), source);
  const Reader task_reader(find("task"), source);
  const Reader collision_reader(find("collision"), source);
  const Reader cost_reader(find("cost"), source);
  const Reader solve_reader(find("solve"), source);
  const Reader timing_reader(find("timing"), source);

  TaskBundle b;
  b.chain = read_chain(chain_reader, points_reader);

  if (!task_reader.present()) {
    throw Error(ErrorCode::kValidation, source + ":0: missing required section [task]");
  }
  Task& task = b.task;
  task.name = task_reader.word("name", "task");
  task.q_s = task_reader.configuration("q_s");
  task.x_f = task_reader.pose("x_f");
  task.x_d = task_reader.pose("x_d");
  if (task_reader.has("q_d")) task.q_d = task_reader.configuration("q_d");
  task.constrain_orientation = task_reader.boolean("constrain_orientation", false);

  task.obstacles.link_clearance = collision_reader.number("link_clearance", 0.0);
  std::set<std::string> names;
  std::size_t index = 0;
  for (const auto& section : sections) {
    if (section.name != "obstacle") continue;
    const Reader r(&section, source);
    std::vector<int> ignore_links;
    Obstacle o = read_obstacle(r, index++, &ignore_links);
    if (!names.insert(o.name).second) r.fail("name", "duplicate obstacle name");
    for (int link : ignore_links) task.obstacles.ignore_pairs.insert({link, o.name});
    task.obstacles.obstacles.push_back(std::move(o));
  }
  task_reader.guarded("q_s", [&] {
    task.validate(b.chain);
    return 0;
  });

  CostSpec& cost = b.cost;
  const std::string cost_word = cost_reader.word("cost", "cee");
  const auto cost_kind = parse_cost(cost_word);
  if (!cost_kind) cost_reader.fail("cost", "expected cq, cb or cee");
  cost.cost_kind = *cost_kind;
  const auto metric = parse_metric(cost_reader.word("metric", "proj"));
  if (!metric) cost_reader.fail("metric", "expected l2, dot or proj");
  cost.metric.kind = *metric;
  cost.metric.k = static_cast<int>(cost_reader.integer("k", 3, -1000000, 1000000));
  cost.lambda = cost_reader.number("lambda", 20.0);
  cost.alpha = cost_reader.number("alpha", 0.3);
  if (cost_reader.has("body_points")) {
    const Value& v = cost_reader.get("body_points");
    if (v.kind != Value::Kind::kList) cost_reader.fail("body_points", "expected a list");
    for (const auto& item : v.items) {
      const auto bp = parse_body_point(cost_reader.word(item, "body_points"));
      if (!bp) cost_reader.fail("body_points", "unknown body point '" + item.text + "'");
      cost.body_points.push_back(*bp);
    }
  } else {
    cost.body_points = CostSpec::default_body_points(cost.cost_kind, b.chain);
  }
  cost_reader.guarded("k", [&] {
    cost.metric.validate();
    return 0;
  });
  cost_reader.guarded("body_points", [&] {
    cost.validate(b.chain);
    return 0;
  });

  SolveOptions& solve = b.solve;
  solve.T = static_cast<int>(solve_reader.integer("waypoints", 10, 2, 10000));
  solve.penalty.initial_weight = solve_reader.number("penalty_initial", 10.0);
  solve.penalty.growth = solve_reader.number("penalty_growth", 10.0);
  solve.penalty.outer_iterations =
      static_cast<int>(solve_reader.integer("outer_iterations", 6, 1, 1000));
  solve.max_inner_iterations =
      static_cast<int>(solve_reader.integer("max_inner_iterations", 500, 1, 1000000));
  solve.gradient_tolerance = solve_reader.number("gradient_tolerance", 1e-6);
  solve.constraint_tolerance = solve_reader.number("constraint_tolerance", 1e-4);
  solve.collision_margin = solve_reader.number("collision_margin", 0.0);
  solve.rng_seed = static_cast<std::uint64_t>(solve_reader.integer(
      "rng_seed", 0, 0, std::numeric_limits<std::int32_t>::max()));
  solve.fixed_base_costs = solve_reader.boolean("fixed_base_costs", true);
  solve_reader.guarded("penalty_initial", [&] {
    solve.validate();
    return 0;
  });

  TimingProfile& timing = b.timing;
  timing.fast = timing_reader.number("fast", 0.05);
  timing.moderate = timing_reader.number("moderate", 0.10);
  timing.slow = timing_reader.number("slow", 0.20);
  timing.attempt_speed = *read_speed(timing_reader, "attempt_speed", Speed::kFast);
  timing.rewind_speed = *read_speed(timing_reader, "rewind_speed", Speed::kModerate);
  timing.approach_speed = *read_speed(timing_reader, "approach_speed", Speed::kModerate);
  timing.repetitions = static_cast<int>(timing_reader.integer("repetitions", 3, 1, 1000));
  b.approach_steps = static_cast<int>(
      timing_reader.integer("approach_steps", kDefaultApproachSteps, 1, 100000));
  timing_reader.guarded("fast", [&] {
    timing.validate();
    return 0;
  });
  return b;
}

inline TaskBundle parse_task_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read task file '" + path.string() + "'");
  std::ostringstream content;
  content << in.rdbuf();
  return parse_task_text(content.str(), path.string());
}

/// Canonical text form of a bundle; parse_task_text reproduces it exactly.
inline std::string serialize_task(const TaskBundle& b) {
  using task_file::format_configuration;
  using task_file::format_double;
  using task_file::format_list;
  using task_file::format_pose;
  std::ostringstream out;
  const auto& chain = b.chain;
  out << "[chain]\n";
  out << "base_mobile = " << (chain.base_mobile() ? "true" : "false") << "\n";
  out << "link_lengths = " << format_list(chain.link_lengths()) << "\n";
  out << "joint_limits = [";
  for (std::size_t i = 0; i < chain.joint_limits().size(); ++i) {
    if (i) out << ", ";
    const auto& lim = chain.joint_limits()[i];
    out << "[" << format_double(lim.lower) << ", " << format_double(lim.upper) << "]";
  }
  out << "]\n\n[chain.body_points]\n";
  for (const auto& [point, loc] : chain.body_points()) {
    out << body_point_name(point) << " = "
        << (loc == kBaseLocation ? std::string("base") : std::to_string(loc)) << "\n";
  }

  const auto& task = b.task;
  out << "\n[task]\n";
  out << "name = \"" << task.name << "\"\n";
  out << "q_s = " << format_configuration(task.q_s) << "\n";
  out << "x_f = " << format_pose(task.x_f) << "\n";
  out << "x_d = " << format_pose(task.x_d) << "\n";
  if (task.q_d) out << "q_d = " << format_configuration(*task.q_d) << "\n";
  out << "constrain_orientation = " << (task.constrain_orientation ? "true" : "false")
      << "\n";

  out << "\n[collision]\n";
  out << "link_clearance = " << format_double(task.obstacles.link_clearance) << "\n";
  for (const auto& o : task.obstacles.obstacles) {
    out << "\n[obstacle]\n";
    out << "name = \"" << o.name << "\"\n";
    if (const auto* c = std::get_if<Circle>(&o.shape)) {
      out << "shape = circle\n";
      out << "center = " << format_list(std::vector<double>{c->center.x(), c->center.y()})
          << "\n";
      out << "radius = " << format_double(c->radius) << "\n";
    } else {
      const auto& box = std::get<Box>(o.shape);
      out << "shape = box\n";
      out << "min = " << format_list(std::vector<double>{box.min.x(), box.min.y()}) << "\n";
      out << "max = " << format_list(std::vector<double>{box.max.x(), box.max.y()}) << "\n";
    }
    std::vector<double> links;
    for (const auto& [link, name] : task.obstacles.ignore_pairs) {
      if (name == o.name) links.push_back(link);
    }
    if (!links.empty()) out << "ignore_links = " << format_list(links) << "\n";
  }

  const auto& cost = b.cost;
  out << "\n[cost]\n";
  out << "cost = " << cost_name(cost.cost_kind) << "\n";
  out << "metric = " << metric_name(cost.metric.kind) << "\n";
  out << "k = " << cost.metric.k << "\n";
  out << "lambda = " << format_double(cost.lambda) << "\n";
  out << "alpha = " << format_double(cost.alpha) << "\n";
  out << "body_points = [";
  for (std::size_t i = 0; i < cost.body_points.size(); ++i) {
    if (i) out << ", ";
    out << body_point_name(cost.body_points[i]);
  }
  out << "]\n";

  const auto& solve = b.solve;
  out << "\n[solve]\n";
  out << "waypoints = " << solve.T << "\n";
  out << "penalty_initial = " << format_double(solve.penalty.initial_weight) << "\n";
  out << "penalty_growth = " << format_double(solve.penalty.growth) << "\n";
  out << "outer_iterations = " << solve.penalty.outer_iterations << "\n";
  out << "max_inner_iterations = " << solve.max_inner_iterations << "\n";
  out << "gradient_tolerance = " << format_double(solve.gradient_tolerance) << "\n";
  out << "constraint_tolerance = " << format_double(solve.constraint_tolerance) << "\n";
  out << "collision_margin = " << format_double(solve.collision_margin) << "\n";
  out << "rng_seed = " << solve.rng_seed << "\n";
  out << "fixed_base_costs = " << (solve.fixed_base_costs ? "true" : "false") << "\n";

  const auto& timing = b.timing;
  out << "\n[timing]\n";
  out << "fast = " << format_double(timing.fast) << "\n";
  out << "moderate = " << format_double(timing.moderate) << "\n";
  out << "slow = " << format_double(timing.slow) << "\n";
  out << "attempt_speed = " << speed_name(timing.attempt_speed) << "\n";
  out << "rewind_speed = " << speed_name(timing.rewind_speed) << "\n";
  out << "approach_speed = " << speed_name(timing.approach_speed) << "\n";
  out << "repetitions = " << timing.repetitions << "\n";
  out << "approach_steps = " << b.approach_steps << "\n";
  return out.str();
}

}  // namespace expressive
