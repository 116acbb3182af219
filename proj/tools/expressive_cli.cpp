// Command-line front end: solve, grid, render, compare, check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expressive/error.hpp"
#include "expressive/export.hpp"
#include "expressive/pipeline.hpp"
#include "expressive/svg.hpp"
#include "expressive/task_file.hpp"

namespace fs = std::filesystem;
using namespace expressive;

namespace {

struct OverrideFlags {
  std::string cost;
  std::string metric;
  std::optional<int> k;
  std::optional<double> lambda;
  std::optional<double> alpha;

  void add_to(CLI::App* app) {
    app->add_option("--cost", cost, "similarity cost: cq, cb or cee");
    app->add_option("--metric", metric, "distance metric: l2, dot or proj");
    app->add_option("-k", k, "proj exponent (odd)");
    app->add_option("--lambda", lambda, "smoothness weight divisor");
    app->add_option("--alpha", alpha, "cost offset");
  }

  Overrides resolve() const {
    Overrides o;
    if (!cost.empty()) {
      o.cost = parse_cost(cost);
      if (!o.cost) throw Error(ErrorCode::kInvalidArgument, "--cost: unknown cost '" + cost + "'");
    }
    if (!metric.empty()) {
      o.metric = parse_metric(metric);
      if (!o.metric) {
        throw Error(ErrorCode::kInvalidArgument, "--metric: unknown metric '" + metric + "'");
      }
    }
    o.k = k;
    o.lambda = lambda;
    o.alpha = alpha;
    return o;
  }
};

TaskBundle load(const std::string& path, const Overrides& o) {
  TaskBundle b = parse_task_file(path);
  try {
    return apply_overrides(std::move(b), o);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("command-line override: ") + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    double v = 0.0;
    const auto* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, flag + ": invalid number '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, flag + ": empty list");
  return out;
}

std::size_t write_frames(const fs::path& dir, const std::vector<std::string>& frames) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.svg", i);
    write_file(dir / name, frames[i]);
  }
  return frames.size();
}

int run_solve(const std::string& task_path, const OverrideFlags& flags, std::string out,
              const std::string& csv, bool baseline) {
  const TaskBundle b = load(task_path, flags.resolve());
  const SolvedPlan s = solve_and_compose(b, baseline);
  if (out.empty()) out = fs::path(task_path).stem().string() + ".plan.json";
  write_file(out, export_structured(s.plan, s.header));
  if (!csv.empty()) write_file(csv, export_csv(s.plan, b.chain, s.header));
  std::printf("task: %s (%s, %s/%s)\n", b.task.name.c_str(),
              baseline ? "baseline" : "expressive",
              std::string(cost_name(b.cost.cost_kind)).c_str(),
              std::string(metric_name(b.cost.metric.kind)).c_str());
  std::printf("objective: %.9g\n", s.result.objective);
  std::printf("constraint_residual: %.3e\n", s.result.constraint_residual);
  std::printf("min_signed_distance: %.6g\n", s.result.min_signed_distance);
  std::printf("duration: %.3f s\n", s.plan.total_duration());
  std::printf("plan: %s\n", out.c_str());
  return 0;
}

int run_grid(const std::string& task_path, const OverrideFlags& flags,
             const std::string& lambdas, const std::string& alphas, const std::string& out) {
  const TaskBundle b = load(task_path, flags.resolve());
  const auto ls = lambdas.empty() ? kDefaultLambdaGrid : parse_list("--lambdas", lambdas);
  const auto as = alphas.empty() ? kDefaultAlphaGrid : parse_list("--alphas", alphas);
  const auto grid = grid_search(b.chain, b.task, b.cost, ls, as, b.solve);
  const std::string table = format_grid_table(grid);
  write_file(out, table);
  std::fputs(table.c_str(), stdout);
  const auto& best = grid.best_cell();
  std::printf("best: lambda=%.6g alpha=%.6g objective=%.9g\n", best.lambda, best.alpha,
              best.result.objective);
  return 0;
}

int run_render(const std::string& plan_path, const std::string& out, int stride) {
  const auto doc = parse_structured(read_file(plan_path));
  const TaskBundle b = parse_task_text(doc.header.spec, plan_path + " (spec)");
  const auto frames = render_svg(doc.plan, b.chain, b.task, stride);
  write_frames(out, frames);
  std::printf("frames: %zu\nout: %s\n", frames.size(), out.c_str());
  return 0;
}

int run_compare(const std::string& task_path, const std::string& out, int stride) {
  const TaskBundle base = parse_task_file(task_path);
  const fs::path dir(out);
  fs::create_directories(dir);
  std::vector<SheetPanel> panels;
  std::ostringstream summary;
  int failures = 0;
  for (CostKind ck : {CostKind::kConfiguration, CostKind::kBodyPoint,
                      CostKind::kEmulateEndEffector}) {
    for (MetricKind mk : {MetricKind::kL2, MetricKind::kDot, MetricKind::kProj}) {
      Overrides o;
      o.cost = ck;
      o.metric = mk;
      const TaskBundle b = apply_overrides(base, o);
      const std::string name =
          std::string(cost_name(ck)) + "_" + std::string(metric_name(mk));
      SheetPanel panel{std::string(cost_name(ck)) + " / " + std::string(metric_name(mk)),
                       std::nullopt, std::nullopt, ""};
      char line[256];
      try {
        const SolvedPlan s = solve_and_compose(b);
        write_file(dir / (name + ".plan.json"), export_structured(s.plan, s.header));
        const auto frames = write_frames(dir / name, render_svg(s.plan, b.chain, b.task, stride));
        panel.xi0 = s.result.trajectory.front();
        panel.xiT = s.result.trajectory.back();
        std::snprintf(line, sizeof(line), "objective %.4g, residual %.1e",
                      s.result.objective, s.result.constraint_residual);
        panel.note = line;
        std::snprintf(line, sizeof(line), "%-9s ok  objective=%.9g residual=%.3e frames=%zu\n",
                      name.c_str(), s.result.objective, s.result.constraint_residual, frames);
      } catch (const Error& e) {
        ++failures;
        panel.note = std::string(error_code_name(e.code())) + ": " + e.what();
        std::snprintf(line, sizeof(line), "%-9s ERR %s: ", name.c_str(),
                      std::string(error_code_name(e.code())).c_str());
        summary << line << e.what() << "\n";
        std::fputs((std::string(line) + e.what() + "\n").c_str(), stdout);
        panels.push_back(std::move(panel));
        continue;
      }
      summary << line;
      std::fputs(line, stdout);
      panels.push_back(std::move(panel));
    }
  }
  write_file(dir / "contact_sheet.svg", render_contact_sheet(base.chain, base.task, panels));
  write_file(dir / "summary.txt", summary.str());
  std::printf("out: %s\n", out.c_str());
  return failures == 0 ? 0 : 1;
}

int run_check(const std::string& task_path, const OverrideFlags& flags) {
  const TaskBundle b = load(task_path, flags.resolve());
  const SolvedPlan s = solve_and_compose(b);
  bool ok = true;
  for (const auto& c : check_invariants(b, s)) {
    std::printf("%s %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expressive attempt trajectories for incompletable tasks"};
  app.require_subcommand(1);

  std::string task_path, plan_path, out, csv, lambdas, alphas;
  bool baseline = false;
  int stride = 5;
  OverrideFlags flags;

  auto* solve = app.add_subcommand("solve", "optimize an attempt and write the plan");
  solve->add_option("taskfile", task_path)->required();
  flags.add_to(solve);
  solve->add_option("--out", out, "structured plan path (default <stem>.plan.json)");
  solve->add_option("--csv", csv, "also write a CSV export");
  solve->add_flag("--baseline", baseline, "compose the repeated-failure baseline");

  auto* grid = app.add_subcommand("grid", "search lambda x alpha");
  grid->add_option("taskfile", task_path)->required();
  flags.add_to(grid);
  grid->add_option("--lambdas", lambdas, "comma-separated lambda values");
  grid->add_option("--alphas", alphas, "comma-separated alpha values");
  grid->add_option("--out", out, "table output path")->required();

  auto* render = app.add_subcommand("render", "render a plan as SVG frames");
  render->add_option("planfile", plan_path)->required();
  render->add_option("--out", out, "output directory")->required();
  render->add_option("--stride", stride, "render every n-th sample")
      ->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "solve all cost x metric pairs");
  compare->add_option("taskfile", task_path)->required();
  compare->add_option("--out", out, "output directory")->required();
  compare->add_option("--stride", stride, "render every n-th sample")
      ->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "solve and verify plan invariants");
  check->add_option("taskfile", task_path)->required();
  flags.add_to(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: USAGE: %s\n", e.what());
    return 64;
  }

  try {
    if (*solve) return run_solve(task_path, flags, out, csv, baseline);
    if (*grid) return run_grid(task_path, flags, lambdas, alphas, out);
    if (*render) return run_render(plan_path, out, stride);
    if (*compare) return run_compare(task_path, out, stride);
    if (*check) return run_check(task_path, flags);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(error_code_name(e.code())).c_str(),
                 e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: INTERNAL: %s\n", e.what());
    return 3;
  }
  return 0;
}
