// Command-line front end: run, compare and replay experiments.
//
// Exit codes: 0 success, 1 invariant violation, 2 usage, config or parse error.

#include <rhp/bench.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

struct Common
{
  std::string scenario;
  std::size_t trials = 20;
  std::uint64_t seed = 42;
  std::string out;
  bool plot = false;
  std::optional<std::size_t> commit;
  std::size_t budget = 1'000;
  double replan_interval = 5.0;
};

void add_common(CLI::App& cmd, Common& c)
{
  cmd.add_option("--scenario", c.scenario, "Scenario YAML file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--trials", c.trials, "Number of trials")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", c.seed, "Seed of the first trial");
  cmd.add_option("--out", c.out, "Output directory")->required();
  cmd.add_option("--commit", c.commit, "Assignments executed per replan (default depth / 3)");
  cmd.add_option("--budget", c.budget, "Node expansions per plan")->check(CLI::PositiveNumber);
  cmd.add_option("--replan-interval", c.replan_interval, "Time between periodic replans");
  cmd.add_flag("--plot", c.plot, "Also write an SVG box plot");
}

int run_experiment(const Common& c, std::vector<rhp::PlannerSpec> specs)
{
  const auto scenario = rhp::load_scenario(c.scenario);
  for (auto& s : specs)
  {
    s.commit = c.commit;
    s.node_budget = c.budget;
    s.replan_interval = c.replan_interval;
    if (s.kind == rhp::PlannerSpec::Kind::RecedingHorizon)
      s.planner_config();  // validates before any trial runs
  }

  const fs::path out(c.out);
  fs::create_directories(out / "traces");
  const auto sink = [&](const rhp::TrialRecord& r, const rhp::EpisodeResult& episode) {
    std::ofstream trace(out / "traces" / (r.planner + "_seed" + std::to_string(r.seed) + ".jsonl"));
    rhp::write_trace(trace, episode.trace);
    std::cerr << r.planner << " seed " << r.seed << ": makespan " << rhp::format_number(r.makespan)
              << (r.completed ? "" : " (time limit)") << ", fires spawned " << r.fires_spawned << '\n';
  };

  std::vector<rhp::TrialStats> stats;
  if (specs.size() == 1)
    stats.push_back(rhp::run_trials(scenario, specs.front(), c.trials, c.seed, sink));
  else
    stats = rhp::compare(scenario, specs, c.trials, c.seed, sink);

  std::ofstream csv(out / "results.csv");
  rhp::write_results_csv(csv, stats);
  const auto report = rhp::format_report(stats, c.seed);
  std::ofstream(out / "report.txt") << report;
  if (c.plot)
    std::ofstream(out / "makespans.svg") << rhp::box_plot_svg(stats);
  std::cout << report;
  return 0;
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s)
  {
    if (ch == sep)
    {
      parts.push_back(cur);
      cur.clear();
    }
    else
      cur += ch;
  }
  parts.push_back(cur);
  return parts;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Receding horizon planning for heterogeneous search-and-rescue teams"};
  app.require_subcommand(1);

  Common run_opts;
  std::string planner = "rhp";
  std::size_t depth = 10;
  auto* run = app.add_subcommand("run", "Run seeded trials of one planner");
  add_common(*run, run_opts);
  run->add_option("--planner", planner, "greedy or rhp")->check(CLI::IsMember({"greedy", "rhp"}));
  run->add_option("--depth", depth, "Planning depth")->check(CLI::PositiveNumber);

  Common cmp_opts;
  std::string planners = "greedy,rhp:10,rhp:15,rhp:20";
  auto* cmp = app.add_subcommand("compare", "Run paired trials of several planners");
  add_common(*cmp, cmp_opts);
  cmp->add_option("--planners", planners, "Comma-separated list: greedy, rhp, rhp:<depth>");

  std::string trace_path;
  auto* rep = app.add_subcommand("replay", "Check a trace and recompute its aggregates");
  rep->add_option("--trace", trace_path, "Trace file")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    app.exit(e);
    return 2;
  }

  try
  {
    if (*run)
    {
      auto spec = rhp::PlannerSpec::parse(planner);
      spec.depth = depth;
      return run_experiment(run_opts, {spec});
    }
    if (*cmp)
    {
      std::vector<rhp::PlannerSpec> specs;
      for (const auto& p : split(planners, ','))
        specs.push_back(rhp::PlannerSpec::parse(p));
      return run_experiment(cmp_opts, specs);
    }
    std::ifstream in(trace_path);
    if (!in)
    {
      std::cerr << "error: cannot open trace '" << trace_path << "'\n";
      return 2;
    }
    const auto summary = rhp::replay(in);
    std::cout << "events " << summary.events << "\n"
              << "planner " << summary.planner << "\n"
              << "seed " << summary.seed << "\n"
              << "makespan " << rhp::format_number(summary.makespan) << "\n"
              << "fires_spawned " << summary.fires_spawned << "\n"
              << "victims_rescued " << summary.victims_rescued << "\n"
              << "completed " << (summary.completed ? "true" : "false") << "\n"
              << "invariants ok\n";
    return 0;
  }
  catch (const rhp::InvariantViolation& e)
  {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  }
  catch (const rhp::ParseError& e)
  {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  }
  catch (const rhp::ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
