#pragma once

#include <rhp/domain.hpp>
#include <rhp/planner.hpp>
#include <rhp/trace.hpp>

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

namespace rhp {

inline constexpr TaskId kVictimTaskOffset = 10'000;
inline constexpr TaskId kExploreTaskOffset = 20'000;
inline constexpr double kMaxFireHealth = 100.0;

struct FireParameters
{
  double initial_health = 30.0;
  double growth_rate = 0.2;        // percent per time-unit
  double water_per_health = 0.05;  // water units per percent
  double spread_radius = 2.0;
  double child_initial_health = 20.0;
  int max_fires = 25;              // per episode, initial fires included

  void validate() const;
};

struct SimulatorConstants
{
  double dt = 0.1;
  double time_limit = 500.0;
  double sensing_radius = 2.0;
  double handling_time = kDefaultHandlingTime;
  /// Start with every grid cell explored.
  bool pre_explored = false;

  void validate() const;
};

struct FleetEntry
{
  ClassId class_id;
  int count = 0;
};

struct ScenarioConfig
{
  WorldGeometry geometry;
  std::vector<AgentClass> classes = builtin_classes();
  std::vector<FleetEntry> fleet;
  int victim_count = 0;
  int initial_fire_count = 0;
  FireParameters fire;
  SimulatorConstants simulator;

  /// Throws ConfigError.
  void validate() const;
};

//==============================================================================
struct Fire
{
  int fire_id = 0;
  Point position = Point::Zero();
  double health = 0.0;
  double growth_rate = 0.0;
  double water_per_health = 0.0;
  bool has_spread = false;
  /// Initial health plus all growth so far.
  double accrued_health = 0.0;
  double water_received = 0.0;

  double required_water() const;
  double radius() const { return 0.02 * health; }
};

enum class VictimStatus { Hidden, Identified, Carried, Rescued };
std::string_view to_string(VictimStatus status);

struct Victim
{
  int victim_id = 0;
  Point position = Point::Zero();
  VictimStatus status = VictimStatus::Hidden;
};

enum class LegAction { None, LoadWater, DeliverWater, Pickup, Drop, Explore };

/// One waypoint of an agent's route and what happens on arrival.
struct Leg
{
  Point target = Point::Zero();
  double speed = 0.0;
  double dwell = 0.0;
  LegAction action = LegAction::None;
  TaskId task_id = -1;
  double amount = 0.0;
};

struct AgentRoute
{
  std::deque<Leg> legs;
  bool at_target = false;
  double dwell_remaining = 0.0;
  std::vector<int> carried;
};

struct WorldState
{
  double time = 0.0;
  WorldGeometry geometry;
  FireParameters fire_parameters;
  SimulatorConstants constants;
  std::vector<AgentClass> classes;
  std::vector<Fire> fires;
  std::vector<Victim> victims;
  std::vector<Agent> agents;
  std::vector<AgentRoute> routes;
  std::vector<bool> explored_cells;
  std::mt19937_64 rng;
  int fires_created = 0;
  int fires_spawned = 0;
  bool replan_requested = false;
  std::vector<TraceEvent> trace;

  bool complete() const;
  int victims_rescued() const;
  void log(std::string event_type, std::int64_t subject_id, const Point& position, Json payload = Json::object());
};

struct EpisodeResult
{
  double makespan = 0.0;
  int fires_spawned = 0;
  int victims_rescued = 0;
  bool completed = false;
  std::vector<TraceEvent> trace;
  std::size_t replans = 0;
  std::size_t nodes_expanded = 0;
};

//==============================================================================
/// Uniform draw in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);

/// Places fires in the forest and victims anywhere in bounds; agents start
/// idle at the base.
WorldState make_world(const ScenarioConfig& scenario, std::uint64_t seed);

/// Hash of the initial placement, used to confirm paired seeding.
std::uint64_t initial_state_hash(const WorldState& world);

/// Motion and arrival actions, fire growth and spread, then discovery.
/// Throws ConfigError for dt <= 0.
void step(WorldState& world, double dt);

/// Spawns one child fire near a parent at full health.
void fire_spread(WorldState& world, std::size_t fire_index);

/// Marks agents' cells explored and identifies victims in sensing range or
/// inside any newly explored cell. Returns the newly identified victim ids.
std::vector<int> discover(WorldState& world);

/// Open demand net of work already queued on agents.
std::vector<Task> derive_tasks(const WorldState& world);

/// Queues the trip for the assignment. Throws InfeasibleAction.
void execute_assignment(WorldState& world, const Assignment& assignment);

/// Predicted time the agent finishes its queued legs.
double predicted_free_time(const WorldState& world, std::size_t agent_index);

WorldSnapshot make_snapshot(const WorldState& world);

EpisodeResult run_episode(const ScenarioConfig& scenario, Planner& planner, std::uint64_t seed);

} // namespace rhp
