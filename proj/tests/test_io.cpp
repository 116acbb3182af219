#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "expressive/export.hpp"
#include "expressive/pipeline.hpp"
#include "expressive/svg.hpp"
#include "expressive/task_file.hpp"
#include "support.hpp"

namespace expressive {
namespace {

using testing::vec;

constexpr std::string_view kMinimal = R"(# two-link arm
[chain]
base_mobile = false
link_lengths = [1, 1]
joint_limits = [[-3, 3], [-3, 3]]

[task]
q_s = [0, 1.5]
x_f = [1, 1]
x_d = [1, 1.2]
)";

std::string with_line(std::string_view extra) { return std::string(kMinimal) + std::string(extra); }

ErrorCode parse_code(const std::string& text, std::string* message = nullptr) {
  try {
    parse_task_text(text, "t.task");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "parse succeeded unexpectedly";
  return ErrorCode::kInvalidArgument;
}

TEST(TaskFile, DefaultsApplied) {
  const auto b = parse_task_text(kMinimal);
  EXPECT_EQ(b.cost.cost_kind, CostKind::kEmulateEndEffector);
  EXPECT_EQ(b.cost.metric.kind, MetricKind::kProj);
  EXPECT_EQ(b.cost.metric.k, 3);
  EXPECT_EQ(b.cost.lambda, 20.0);
  EXPECT_EQ(b.cost.alpha, 0.3);
  EXPECT_EQ(b.solve.T, 10);
  EXPECT_EQ(b.timing.repetitions, 3);
  EXPECT_EQ(b.approach_steps, kDefaultApproachSteps);
  EXPECT_EQ(b.task.q_s, vec({0, 1.5}));
  EXPECT_FALSE(b.task.q_d.has_value());
}

TEST(TaskFile, EvenKRejectedWithLine) {
  std::string msg;
  EXPECT_EQ(parse_code(with_line("[cost]\nmetric = proj\nk = 2\n"), &msg), ErrorCode::kValidation);
  EXPECT_NE(msg.find("t.task:13"), std::string::npos) << msg;
  EXPECT_NE(msg.find("k must be odd"), std::string::npos) << msg;
}

TEST(TaskFile, NegativeLinkLength) {
  std::string text(kMinimal);
  text.replace(text.find("[1, 1]\n"), 6, "[-1, 1]");
  std::string msg;
  EXPECT_EQ(parse_code(text, &msg), ErrorCode::kValidation);
  EXPECT_NE(msg.find("t.task:4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("link_lengths"), std::string::npos) << msg;
}

TEST(TaskFile, UnknownKeysAndSections) {
  std::string msg;
  EXPECT_EQ(parse_code(with_line("[cost]\nlamda = 3\n"), &msg), ErrorCode::kParse);
  EXPECT_NE(msg.find("lamda"), std::string::npos);
  EXPECT_EQ(parse_code(with_line("[costs]\n")), ErrorCode::kParse);
  EXPECT_EQ(parse_code(with_line("[task]\n")), ErrorCode::kParse);
  EXPECT_EQ(parse_code(with_line("[cost]\nalpha = 1\nalpha = 2\n")), ErrorCode::kParse);
  EXPECT_EQ(parse_code(with_line("[cost]\nalpha = [1\n")), ErrorCode::kParse);
  EXPECT_EQ(parse_code(with_line("[cost]\nmetric = cosine\n")), ErrorCode::kValidation);
  EXPECT_EQ(parse_code("[chain]\nbase_mobile = false\n", &msg), ErrorCode::kValidation);
  EXPECT_NE(msg.find("[task]"), std::string::npos);
}

TEST(TaskFile, UnreadableFile) {
  try {
    parse_task_file("/nonexistent/none.task");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(TaskFile, SerializeRoundTrip) {
  for (const char* name : {"lift", "push", "pull", "pull_down", "push_sideways"}) {
    const auto b = testing::bundled(name);
    const std::string once = serialize_task(b);
    const std::string twice = serialize_task(parse_task_text(once));
    EXPECT_EQ(once, twice) << name;
  }
}

// Random byte edits of a valid file must either parse or raise a library error.
TEST(TaskFile, MutatedInputOnlyRaisesLibraryErrors) {
  std::ifstream in(testing::task_path("push"));
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string original = ss.str();
  const std::string alphabet = "[]=,#\"\n -.e0123456789abcxyz";
  std::mt19937_64 rng(99);
  int parsed = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text = original;
    const int edits = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int e = 0; e < edits; ++e) {
      const auto pos = std::uniform_int_distribution<std::size_t>(0, text.size() - 1)(rng);
      const char c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: text[pos] = c; break;
        case 1: text.insert(text.begin() + static_cast<std::ptrdiff_t>(pos), c); break;
        default: text.erase(pos, 1); break;
      }
    }
    try {
      parse_task_text(text);
      ++parsed;
    } catch (const Error&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << "non-library exception: " << e.what() << "\n" << text;
    }
  }
  EXPECT_GT(parsed, 0);
}

class ExportTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bundle_ = new TaskBundle(testing::bundled("lift"));
    solved_ = new SolvedPlan(solve_and_compose(*bundle_));
  }
  static void TearDownTestSuite() {
    delete solved_;
    delete bundle_;
  }
  static TaskBundle* bundle_;
  static SolvedPlan* solved_;
};
TaskBundle* ExportTest::bundle_ = nullptr;
SolvedPlan* ExportTest::solved_ = nullptr;

TEST_F(ExportTest, CsvShapeAndDeterminism) {
  const auto& s = *solved_;
  const std::string csv = export_csv(s.plan, bundle_->chain, s.header);
  EXPECT_EQ(csv, export_csv(s.plan, bundle_->chain, s.header));
  std::istringstream in(csv);
  std::string line;
  std::vector<double> times;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (!header_seen) {
      EXPECT_EQ(line, "time,phase,q0,q1,q2,ee_x,ee_y");
      header_seen = true;
      continue;
    }
    times.push_back(std::stod(line.substr(0, line.find(','))));
  }
  const double total = s.plan.total_duration();
  EXPECT_EQ(times.size(), static_cast<std::size_t>(std::llround(total / kExportDt)) + 1);
  for (std::size_t i = 1; i < times.size(); ++i) EXPECT_GT(times[i], times[i - 1]);
  EXPECT_NEAR(times.back(), total, 1e-9);
  EXPECT_NE(csv.find("# lambda = 20"), std::string::npos);
}

TEST_F(ExportTest, StructuredRoundTrip) {
  const auto& s = *solved_;
  const std::string json = export_structured(s.plan, s.header);
  const auto doc = parse_structured(json);
  EXPECT_EQ(doc.header.task_name, "lift");
  EXPECT_EQ(doc.header.spec, s.header.spec);
  EXPECT_NEAR(doc.header.objective, s.header.objective, 1e-9);
  ASSERT_EQ(doc.plan.phases().size(), s.plan.phases().size());
  for (std::size_t p = 0; p < s.plan.phases().size(); ++p) {
    const auto& a = s.plan.phases()[p];
    const auto& b = doc.plan.phases()[p];
    EXPECT_EQ(a.label, b.label);
    EXPECT_NEAR(a.step_duration, b.step_duration, 1e-9);
    ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
    for (std::size_t t = 0; t < a.trajectory.size(); ++t) {
      EXPECT_LE((a.trajectory[t] - b.trajectory[t]).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
  EXPECT_EQ(export_structured(doc.plan, doc.header), json);
  // The embedded spec rebuilds the same inputs.
  EXPECT_EQ(serialize_task(parse_task_text(doc.header.spec)), s.header.spec);
}

TEST_F(ExportTest, StructuredRejectsGarbage) {
  for (const char* bad : {"", "{", "[]", R"({"format":"other","version":1})"}) {
    try {
      parse_structured(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
    }
  }
}

TEST_F(ExportTest, SvgFrames) {
  const auto& s = *solved_;
  const auto samples = sample_plan(s.plan, 0.02);
  const auto frames = render_svg(s.plan, bundle_->chain, bundle_->task, 5);
  EXPECT_EQ(frames.size(), frame_count(samples.size(), 5));
  EXPECT_EQ(frames, render_svg(s.plan, bundle_->chain, bundle_->task, 5));
  for (const auto& f : frames) {
    EXPECT_TRUE(f.starts_with("<svg"));
    EXPECT_NE(f.find("id=\"clock\""), std::string::npos);
  }
  EXPECT_THROW(render_svg(s.plan, bundle_->chain, bundle_->task, 0), Error);
}

std::string strip_clock(const std::string& svg) {
  const auto a = svg.find("<text id=\"clock\"");
  return svg.substr(0, a) + svg.substr(svg.find('\n', a));
}

TEST(Svg, ConstantPlanFramesDifferOnlyInClock) {
  const auto chain = testing::unit_arm();
  Task task;
  task.q_s = vec({0.0, 1.5});
  task.x_f = forward_kinematics(chain, task.q_s, BodyPoint::kEndEffector);
  task.x_d = task.x_f;
  const Trajectory still(std::vector<Configuration>(3, task.q_s));
  const MotionPlan plan({{PhaseLabel::kAttempt, still, 0.05}, {PhaseLabel::kAttempt, still, 0.05}});
  const auto frames = render_svg(plan, chain, task, 1);
  ASSERT_GT(frames.size(), 2u);
  for (const auto& f : frames) EXPECT_EQ(strip_clock(f), strip_clock(frames.front()));
  EXPECT_NE(frames.front(), frames.back());
}

TEST(Pipeline, ChecksPassOnBundledTask) {
  const auto b = testing::bundled("pull");
  const auto solved = solve_and_compose(b);
  const auto lines = check_invariants(b, solved);
  EXPECT_GE(lines.size(), 10u);
  for (const auto& l : lines) EXPECT_TRUE(l.pass) << l.name << ": " << l.detail;
}

TEST(Pipeline, OverridesEchoedInHeader) {
  Overrides o;
  o.cost = CostKind::kBodyPoint;
  o.metric = MetricKind::kDot;
  o.lambda = 40.0;
  const auto b = apply_overrides(parse_task_text(kMinimal), o);
  EXPECT_EQ(b.cost.body_points, CostSpec::default_body_points(CostKind::kBodyPoint, b.chain));
  const auto solved = solve_and_compose(b);
  EXPECT_NE(solved.header.spec.find("cost = cb"), std::string::npos) << solved.header.spec;
  EXPECT_NE(solved.header.spec.find("metric = dot"), std::string::npos);
  EXPECT_NE(solved.header.spec.find("lambda = 40"), std::string::npos);
  Overrides even;
  even.metric = MetricKind::kProj;
  even.k = 4;
  EXPECT_THROW(apply_overrides(b, even), Error);
}

}  // namespace
}  // namespace expressive
