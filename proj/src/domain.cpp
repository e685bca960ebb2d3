#include <rhp/domain.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace rhp {

std::string_view to_string(Terrain terrain)
{
  return terrain == Terrain::Forest ? "forest" : "city";
}

std::string_view to_string(TaskKind kind)
{
  switch (kind)
  {
    case TaskKind::ExtinguishFire: return "extinguish_fire";
    case TaskKind::RescueVictim: return "rescue_victim";
    case TaskKind::Explore: return "explore";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name)
{
  for (auto kind : {TaskKind::ExtinguishFire, TaskKind::RescueVictim, TaskKind::Explore})
  {
    if (to_string(kind) == name)
      return kind;
  }
  throw ConfigError("unknown task kind '" + std::string(name) + "'");
}

//==============================================================================
bool Rect::contains(const Point& p) const
{
  return p.x() >= min.x() && p.x() < max.x() && p.y() >= min.y() && p.y() < max.y();
}

bool Rect::overlaps(const Rect& other) const
{
  return min.x() < other.max.x() && other.min.x() < max.x()
      && min.y() < other.max.y() && other.min.y() < max.y();
}

//==============================================================================
Terrain WorldGeometry::terrain_at(const Point& p) const
{
  if (forest_region.contains(p))
    return Terrain::Forest;
  if (city_region.contains(p))
    return Terrain::City;
  // Points on the far edges of the world belong to whichever region is
  // closest.
  const Point q = clamp(p);
  const double df = (q - q.cwiseMax(forest_region.min).cwiseMin(forest_region.max)).norm();
  const double dc = (q - q.cwiseMax(city_region.min).cwiseMin(city_region.max)).norm();
  return df < dc ? Terrain::Forest : Terrain::City;
}

bool WorldGeometry::in_bounds(const Point& p) const
{
  return p.x() >= 0.0 && p.x() <= width && p.y() >= 0.0 && p.y() <= height;
}

Point WorldGeometry::clamp(const Point& p) const
{
  return Point(std::clamp(p.x(), 0.0, width), std::clamp(p.y(), 0.0, height));
}

int WorldGeometry::cells_x() const
{
  return static_cast<int>(std::ceil(width / cell_size - 1e-12));
}

int WorldGeometry::cells_y() const
{
  return static_cast<int>(std::ceil(height / cell_size - 1e-12));
}

int WorldGeometry::cell_index(const Point& p) const
{
  const Point q = clamp(p);
  const int cx = std::min(static_cast<int>(q.x() / cell_size), cells_x() - 1);
  const int cy = std::min(static_cast<int>(q.y() / cell_size), cells_y() - 1);
  return cy * cells_x() + cx;
}

Point WorldGeometry::cell_center(int cell) const
{
  const int cx = cell % cells_x();
  const int cy = cell / cells_x();
  const double x0 = cx * cell_size;
  const double y0 = cy * cell_size;
  return Point(
    0.5 * (x0 + std::min(x0 + cell_size, width)),
    0.5 * (y0 + std::min(y0 + cell_size, height)));
}

void WorldGeometry::validate() const
{
  if (!(width > 0.0) || !(height > 0.0))
    throw ConfigError("world width and height must be positive");
  if (!(cell_size > 0.0))
    throw ConfigError("exploration cell size must be positive");

  for (const Rect* r : {&city_region, &forest_region})
  {
    if (r->min.x() < 0.0 || r->min.y() < 0.0 || r->max.x() > width || r->max.y() > height
        || r->min.x() >= r->max.x() || r->min.y() >= r->max.y())
      throw ConfigError("terrain regions must be non-empty and lie within the world bounds");
  }
  if (city_region.overlaps(forest_region))
    throw ConfigError("city and forest regions overlap");
  if (!in_bounds(base_position) || !in_bounds(hospital_position))
    throw ConfigError("base and hospital must lie inside the world");
}

//==============================================================================
double capacity_for(const AgentClass& agent_class, TaskKind kind)
{
  switch (kind)
  {
    case TaskKind::ExtinguishFire: return agent_class.capabilities.water_capacity;
    case TaskKind::RescueVictim: return agent_class.capabilities.rescue_capacity;
    case TaskKind::Explore: return 1.0;
  }
  return 0.0;
}

bool is_dispatchable(const AgentClass& agent_class, const Task& task)
{
  return capacity_for(agent_class, task.kind) > 0.0
      && agent_class.capabilities.speed_in(task.terrain) > 0.0;
}

double trip_duration(
  const AgentClass& agent_class,
  const Task& task,
  const WorldGeometry& geometry,
  double handling_time)
{
  if (!is_dispatchable(agent_class, task))
  {
    throw NotDispatchable(
      "class '" + agent_class.class_id + "' cannot serve task "
      + std::to_string(task.task_id) + " (" + std::string(to_string(task.kind)) + ")");
  }
  const double distance = (task.location - geometry.base_position).norm();
  return 2.0 * distance / agent_class.capabilities.speed_in(task.terrain) + handling_time;
}

std::vector<AgentClass> builtin_classes()
{
  return {
    {"ground_unit", {1.0, 1.0, 0.1, 0.1}},
    {"helicopter", {5.0, 4.0, 0.5, 0.5}},
    {"drone", {0.0, 0.0, 0.4, 0.4}},
    {"agv", {2.0, 4.0, 0.2, 0.0}},
  };
}

const AgentClass& find_class(std::span<const AgentClass> classes, const ClassId& id)
{
  const auto it = std::find_if(
    classes.begin(), classes.end(), [&](const AgentClass& c) { return c.class_id == id; });
  if (it == classes.end())
    throw ConfigError("unknown agent class '" + id + "'");
  return *it;
}

void validate_classes(std::span<const AgentClass> classes)
{
  std::set<ClassId> seen;
  for (const auto& c : classes)
  {
    if (!seen.insert(c.class_id).second)
      throw ConfigError("duplicate agent class '" + c.class_id + "'");
    const auto& k = c.capabilities;
    if (k.water_capacity < 0.0 || k.rescue_capacity < 0.0 || k.speed_forest < 0.0
        || k.speed_city < 0.0)
      throw ConfigError("class '" + c.class_id + "' has a negative capability");
  }
}

void validate_agent(const Agent& agent, const AgentClass& agent_class)
{
  const auto& k = agent_class.capabilities;
  if (agent.water_load < 0.0 || agent.water_load > k.water_capacity)
    throw ConfigError("agent " + std::to_string(agent.agent_id) + " water load out of range");
  if (agent.victim_load < 0.0 || agent.victim_load > k.rescue_capacity)
    throw ConfigError("agent " + std::to_string(agent.agent_id) + " victim load out of range");
  if (agent.busy_until < 0.0)
    throw ConfigError("agent " + std::to_string(agent.agent_id) + " busy_until is negative");
}

} // namespace rhp
