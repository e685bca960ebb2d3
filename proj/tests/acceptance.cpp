// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "oracles.hpp"

#include <rhp/bench.hpp>
#include <rhp/heuristic.hpp>
#include <rhp/lp_solver.hpp>
#include <rhp/planner.hpp>

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

using namespace rhp;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

PlannerConfig full_depth()
{
  auto c = PlannerConfig::with_depth(PlannerConfig::unlimited);
  c.node_budget = PlannerConfig::unlimited;
  return c;
}

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

//==============================================================================
/// Up to 3 agents, 4 tasks and integer efforts up to 3; shared by the
/// exactness and pruning checks.
std::vector<WorldSnapshot> exactness_suite()
{
  std::mt19937_64 rng(101);
  std::vector<WorldSnapshot> suite;
  for (int i = 0; i < 120; ++i)
    suite.push_back(oracle::random_instance(rng, 3, 4, 3));
  return suite;
}

void exact_at_full_depth(const std::vector<WorldSnapshot>& suite)
{
  const auto start = std::chrono::steady_clock::now();
  int ok = 0;
  double worst = 0.0;
  for (const auto& s : suite)
  {
    const double opt = oracle::optimal_makespan(s);
    const auto r = plan(s, full_depth());
    const double err = std::max(std::abs(r.bound_J - opt), std::abs(oracle::schedule_makespan(s, r.schedule) - opt));
    worst = std::max(worst, err);
    ok += r.complete && err <= 1e-9;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto n = static_cast<int>(suite.size());
  report(1, ok == n, std::to_string(ok) + "/" + std::to_string(n) + " full-depth plans optimal, max error " + fmt(worst)
                       + "; " + fmt(seconds) + " s");
}

void admissible_heuristic()
{
  std::mt19937_64 rng(202);
  const int n = 250;
  const auto h = lp_cost_to_go();
  int ok = 0, strict = 0;
  for (int i = 0; i < n; ++i)
  {
    const auto s = oracle::random_instance(rng);
    const double opt = oracle::optimal_makespan(s);
    PlanningContext ctx(s);
    const double bound = h(ctx, make_root(ctx));
    ok += bound <= opt + 1e-6;
    strict += bound < opt - 1e-6;
  }
  report(2, ok == n && strict > 0,
         std::to_string(ok) + "/" + std::to_string(n) + " bounds at most the optimum, " + std::to_string(strict) + " strict");
}

void lp_matches_enumeration()
{
  std::mt19937_64 rng(303);
  const int n = 600;
  int ok = 0;
  std::map<lp::Status, int> seen;
  for (int i = 0; i < n; ++i)
  {
    const auto problem = oracle::random_lp(rng);
    const auto r = lp::solve(problem);
    const auto o = oracle::vertex_enumeration(problem);
    ++seen[o.status];
    bool good = r.status == o.status;
    if (good && r.status == lp::Status::Optimal)
      good = std::abs(r.objective_value - o.objective) <= 1e-6 && problem.max_violation(r.solution) <= 1e-6;
    ok += good;
  }
  report(3, ok == n && seen.size() == 3,
         std::to_string(ok) + "/" + std::to_string(n) + " LPs agree (" + std::to_string(seen[lp::Status::Optimal])
           + " optimal, " + std::to_string(seen[lp::Status::Infeasible]) + " infeasible, "
           + std::to_string(seen[lp::Status::Unbounded]) + " unbounded)");
}

//==============================================================================
struct Experiment
{
  std::vector<TrialStats> stats;
  std::map<std::string, std::string> traces;  // "<planner>_<seed>" -> JSON lines
  double seconds = 0.0;
};

Experiment run_experiment(const ScenarioConfig& scenario, const std::vector<PlannerSpec>& specs)
{
  Experiment e;
  const auto start = std::chrono::steady_clock::now();
  e.stats = compare(scenario, specs, 20, 42, [&](const TrialRecord& r, const EpisodeResult& episode) {
    std::ostringstream os;
    write_trace(os, episode.trace);
    e.traces[r.planner + "_" + std::to_string(r.seed)] = os.str();
  });
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

void simulation_criteria()
{
  const auto scenario = load_scenario(RHP_SCENARIO_DIR "/default.yaml");
  const std::vector<PlannerSpec> specs = {PlannerSpec::parse("greedy"), PlannerSpec::parse("rhp:10"),
                                          PlannerSpec::parse("rhp:20")};
  const auto first = run_experiment(scenario, specs);
  const auto& greedy = first.stats[0];
  const auto& rhp10 = first.stats[1];
  const auto& rhp20 = first.stats[2];

  const double r1 = rhp10.makespan.mean / greedy.makespan.mean;
  const double r2 = rhp20.makespan.mean / rhp10.makespan.mean;
  report(4, r1 <= 0.85 && r2 <= 1.10 && first.seconds < 600.0,
         "20 paired trials: greedy " + fmt(greedy.makespan.mean) + ", rhp10 " + fmt(rhp10.makespan.mean) + ", rhp20 "
           + fmt(rhp20.makespan.mean) + "; rhp10/greedy " + fmt(r1) + " (<= 0.85), rhp20/rhp10 " + fmt(r2)
           + " (<= 1.10); " + fmt(first.seconds) + " s");

  report(5, greedy.mean_fires_spawned >= rhp10.mean_fires_spawned,
         "mean fires spawned: greedy " + fmt(greedy.mean_fires_spawned) + ", rhp10 " + fmt(rhp10.mean_fires_spawned));

  const auto second = run_experiment(scenario, specs);
  std::size_t identical = 0, clean = 0;
  std::string first_problem;
  for (const auto& [key, text] : first.traces)
  {
    const auto it = second.traces.find(key);
    identical += it != second.traces.end() && it->second == text;
    try
    {
      std::istringstream in(text);
      replay(in);
      ++clean;
    }
    catch (const std::exception& ex)
    {
      if (first_problem.empty())
        first_problem = key + ": " + ex.what();
    }
  }
  const std::size_t n = first.traces.size();
  report(6, n == 60 && identical == n && clean == n,
         std::to_string(identical) + "/" + std::to_string(n) + " reruns byte-identical, " + std::to_string(clean) + "/"
           + std::to_string(n) + " traces replay without violations" + (first_problem.empty() ? "" : " (" + first_problem + ")"));
}

//==============================================================================
void pruning_is_sound(const std::vector<WorldSnapshot>& suite)
{
  int same = 0, differs = 0;
  for (const auto& s : suite)
  {
    auto c = full_depth();
    const auto pruned = plan(s, c);
    c.pruning = false;
    const auto exhaustive = plan(s, c);
    same += std::abs(oracle::schedule_makespan(s, pruned.schedule) - oracle::schedule_makespan(s, exhaustive.schedule)) <= 1e-9
         && std::abs(pruned.bound_J - exhaustive.bound_J) <= 1e-9;
    differs += pruned.nodes_expanded != exhaustive.nodes_expanded;
  }
  const auto n = static_cast<int>(suite.size());
  report(7, same == n && differs > 0,
         std::to_string(same) + "/" + std::to_string(n) + " makespans unchanged by pruning, node counts differ on "
           + std::to_string(differs));
}

} // namespace

int main()
{
  const auto suite = exactness_suite();
  exact_at_full_depth(suite);
  admissible_heuristic();
  lp_matches_enumeration();
  simulation_criteria();
  pruning_is_sound(suite);
  return failures ? 1 : 0;
}
