#pragma once

#include <rhp/planner.hpp>
#include <rhp/simulator.hpp>
#include <rhp/trace.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rhp {

//==============================================================================
/// Reads the YAML scenario format. Unknown keys are errors. Throws ParseError
/// for malformed YAML and ConfigError for bad values.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

//==============================================================================
struct PlannerSpec
{
  enum class Kind { Greedy, RecedingHorizon };

  Kind kind = Kind::Greedy;
  std::size_t depth = 10;
  std::optional<std::size_t> commit;
  /// Far below the planner's own default so a full comparison runs in minutes.
  std::size_t node_budget = 1'000;
  double replan_interval = 5.0;

  /// "greedy", "rhp" or "rhp:<depth>". Throws ConfigError.
  static PlannerSpec parse(const std::string& text);

  PlannerConfig planner_config() const;
  std::string label() const;
  std::unique_ptr<Planner> make() const;
};

//==============================================================================
struct TrialRecord
{
  std::string planner;
  std::uint64_t seed = 0;
  double makespan = 0.0;
  int fires_spawned = 0;
  int victims_rescued = 0;
  bool completed = false;
  std::size_t replans = 0;
  std::size_t nodes_expanded = 0;
};

struct Summary
{
  double mean = 0.0;
  double median = 0.0;
  /// Sample standard deviation with an n - 1 denominator; 0 for one sample.
  double stddev = 0.0;
};

Summary summarize(std::vector<double> values);

struct TrialStats
{
  std::string planner;
  /// Sorted by seed.
  std::vector<TrialRecord> trials;
  Summary makespan;
  std::size_t completed = 0;
  double mean_fires_spawned = 0.0;

  std::vector<double> makespans() const;
  static TrialStats from_trials(std::string planner, std::vector<TrialRecord> trials);
};

/// Called once per finished trial, e.g. to write its trace.
using TrialSink = std::function<void(const TrialRecord&, const EpisodeResult&)>;

/// Seeds base_seed .. base_seed + trial_count - 1.
TrialStats run_trials(
  const ScenarioConfig& scenario,
  const PlannerSpec& spec,
  std::size_t trial_count,
  std::uint64_t base_seed,
  const TrialSink& sink = {});

/// Same seeds for every planner. Throws ConfigError for fewer than two specs.
std::vector<TrialStats> compare(
  const ScenarioConfig& scenario,
  const std::vector<PlannerSpec>& specs,
  std::size_t trial_count,
  std::uint64_t base_seed,
  const TrialSink& sink = {});

//==============================================================================
struct ReferenceRow
{
  std::string planner;
  double mean;
  double median;
  double stddev;
};

/// Published makespan statistics, obtained under different simulator
/// constants; shown for orientation only.
const std::vector<ReferenceRow>& reference_makespans();

std::string format_report(const std::vector<TrialStats>& stats, std::uint64_t base_seed);
void write_results_csv(std::ostream& os, const std::vector<TrialStats>& stats);
std::string box_plot_svg(const std::vector<TrialStats>& stats);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

//==============================================================================
struct ReplaySummary
{
  std::size_t events = 0;
  std::uint64_t seed = 0;
  std::string planner;
  double makespan = 0.0;
  int fires_spawned = 0;
  int victims_rescued = 0;
  bool completed = false;
  /// One entry per failed check, prefixed with the check's name.
  std::vector<std::string> violations;
};

/// Recomputes the episode aggregates and checks conservation and motion.
ReplaySummary replay_events(const std::vector<TraceEvent>& events);

/// Parses and replays; throws ParseError or InvariantViolation.
ReplaySummary replay(std::istream& is);

} // namespace rhp
