#pragma once

#include <rhp/errors.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rhp {

using Point = Eigen::Vector2d;
using AgentId = std::int32_t;
using TaskId = std::int32_t;
using ClassId = std::string;

/// Service time spent at the target on every trip.
inline constexpr double kDefaultHandlingTime = 1.0;

enum class Terrain { Forest, City };
enum class TaskKind { ExtinguishFire, RescueVictim, Explore };

std::string_view to_string(Terrain terrain);
std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

//==============================================================================
struct Rect
{
  Point min = Point::Zero();
  Point max = Point::Zero();

  bool contains(const Point& p) const;
  bool overlaps(const Rect& other) const;
};

//==============================================================================
/// Static layout of the world: bounds, base, hospital, terrain regions and the
/// exploration grid. Region membership is half-open on the max edge so that
/// two regions sharing an edge stay disjoint.
struct WorldGeometry
{
  double width = 20.0;
  double height = 20.0;
  Point base_position = Point(1.0, 1.0);
  Point hospital_position = Point(1.0, 2.0);
  Rect city_region{Point(0.0, 0.0), Point(10.0, 20.0)};
  Rect forest_region{Point(10.0, 0.0), Point(20.0, 20.0)};
  double cell_size = 4.0;

  Terrain terrain_at(const Point& p) const;
  bool in_bounds(const Point& p) const;
  Point clamp(const Point& p) const;

  int cells_x() const;
  int cells_y() const;
  int cell_count() const { return cells_x() * cells_y(); }
  int cell_index(const Point& p) const;
  Point cell_center(int cell) const;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

//==============================================================================
struct CapabilityVector
{
  double water_capacity = 0.0;
  double rescue_capacity = 0.0;
  double speed_forest = 0.0;
  double speed_city = 0.0;

  double speed_in(Terrain terrain) const
  {
    return terrain == Terrain::Forest ? speed_forest : speed_city;
  }

  double max_speed() const { return std::max(speed_forest, speed_city); }

  bool operator==(const CapabilityVector&) const = default;
};

struct AgentClass
{
  ClassId class_id;
  CapabilityVector capabilities;

  bool operator==(const AgentClass&) const = default;
};

struct Agent
{
  AgentId agent_id = 0;
  ClassId class_id;
  Point position = Point::Zero();
  double water_load = 0.0;
  double victim_load = 0.0;
  double busy_until = 0.0;
};

struct Task
{
  TaskId task_id = 0;
  TaskKind kind = TaskKind::Explore;
  Point location = Point::Zero();
  Terrain terrain = Terrain::City;
  double required_effort = 1.0;
  double remaining_effort = 1.0;
  /// Earliest time an agent may start on the task.
  double release_time = 0.0;
};

struct Assignment
{
  AgentId agent_id = 0;
  TaskId task_id = 0;
  double contribution = 0.0;
  double start_time = 0.0;
  double duration = 0.0;

  double end_time() const { return start_time + duration; }

  bool operator==(const Assignment&) const = default;
};

//==============================================================================
double capacity_for(const AgentClass& agent_class, TaskKind kind);

/// True iff the class can contribute to the task and can move in its terrain.
/// Routes are single-terrain: the whole trip runs at the speed of the task's
/// terrain.
bool is_dispatchable(const AgentClass& agent_class, const Task& task);

/// Round trip base -> task -> base at the task-terrain speed plus handling.
/// Throws NotDispatchable.
double trip_duration(
  const AgentClass& agent_class,
  const Task& task,
  const WorldGeometry& geometry,
  double handling_time = kDefaultHandlingTime);

/// Ground unit, helicopter, drone and AGV in that order.
std::vector<AgentClass> builtin_classes();

const AgentClass& find_class(std::span<const AgentClass> classes, const ClassId& id);

/// Throws ConfigError for duplicate class ids or negative capabilities.
void validate_classes(std::span<const AgentClass> classes);

/// Throws ConfigError if the agent's loads break its class limits.
void validate_agent(const Agent& agent, const AgentClass& agent_class);

} // namespace rhp
