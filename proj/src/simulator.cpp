#include <rhp/simulator.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace rhp {

namespace {

constexpr double kEps = 1e-12;

/// Keeps the clock on a 1e-9 grid so that repeated dt additions do not drift.
double snap_time(double t)
{
  return std::round(t * 1e9) / 1e9;
}

Json point_json(const Point& p)
{
  return Json::array({p.x(), p.y()});
}

std::size_t agent_index(const WorldState& world, AgentId id)
{
  for (std::size_t a = 0; a < world.agents.size(); ++a)
  {
    if (world.agents[a].agent_id == id)
      return a;
  }
  throw InfeasibleAction("unknown agent " + std::to_string(id));
}

Fire* find_fire(WorldState& world, int fire_id)
{
  for (auto& f : world.fires)
  {
    if (f.fire_id == fire_id)
      return &f;
  }
  return nullptr;
}

/// Victims at one exact location share a rescue task keyed by the lowest id.
struct VictimSite
{
  TaskId task_id;
  Point position;
  int available = 0;  // Identified, not yet picked up
};

std::vector<VictimSite> victim_sites(const WorldState& world)
{
  std::vector<VictimSite> sites;
  for (const auto& v : world.victims)
  {
    if (v.status != VictimStatus::Identified)
      continue;
    auto it = std::find_if(sites.begin(), sites.end(), [&](const VictimSite& s) { return s.position == v.position; });
    if (it == sites.end())
      sites.push_back({kVictimTaskOffset + v.victim_id, v.position, 1});
    else
    {
      it->task_id = std::min(it->task_id, kVictimTaskOffset + v.victim_id);
      ++it->available;
    }
  }
  return sites;
}

/// Marks a cell explored and identifies the hidden victims inside it.
void explore_cell(WorldState& world, int cell, std::int64_t agent_id, std::vector<int>* identified)
{
  if (world.explored_cells[static_cast<std::size_t>(cell)])
    return;
  world.explored_cells[static_cast<std::size_t>(cell)] = true;
  world.log("cell_explored", cell, world.geometry.cell_center(cell), {{"agent", agent_id}});
  for (auto& v : world.victims)
  {
    if (v.status == VictimStatus::Hidden && world.geometry.cell_index(v.position) == cell)
    {
      v.status = VictimStatus::Identified;
      world.log("victim_identified", v.victim_id, v.position, {{"agent", agent_id}, {"reason", "cell_explored"}});
      if (identified)
        identified->push_back(v.victim_id);
      world.replan_requested = true;
    }
  }
}

void perform(WorldState& world, std::size_t a, const Leg& leg)
{
  Agent& agent = world.agents[a];
  AgentRoute& route = world.routes[a];
  const auto id = static_cast<std::int64_t>(agent.agent_id);
  switch (leg.action)
  {
    case LegAction::None:
      world.log("arrive", id, agent.position);
      break;

    case LegAction::LoadWater:
      agent.water_load += leg.amount;
      world.log("load_water", id, agent.position, {{"fire_id", leg.task_id}, {"amount", leg.amount}});
      break;

    case LegAction::DeliverWater: {
      const double amount = agent.water_load;
      agent.water_load = 0.0;
      Fire* fire = find_fire(world, leg.task_id);
      if (!fire)
      {
        world.log("deliver_water", id, agent.position,
                  {{"fire_id", leg.task_id}, {"amount", amount}, {"applied", false}});
        break;
      }
      fire->water_received += amount;
      fire->health -= amount / fire->water_per_health;
      world.log("deliver_water", id, agent.position,
                {{"fire_id", leg.task_id}, {"amount", amount}, {"applied", true},
                 {"health_after", std::max(0.0, fire->health)}});
      if (fire->health <= 1e-9)
      {
        world.log("fire_extinguished", fire->fire_id, fire->position,
                  {{"accrued_water", fire->accrued_health * fire->water_per_health},
                   {"water_received", fire->water_received}});
        const int fid = fire->fire_id;
        std::erase_if(world.fires, [&](const Fire& f) { return f.fire_id == fid; });
      }
      break;
    }

    case LegAction::Pickup: {
      const auto& c = find_class(world.classes, agent.class_id);
      const int room = static_cast<int>(std::floor(c.capabilities.rescue_capacity - agent.victim_load + 1e-9));
      int wanted = std::min(static_cast<int>(std::lround(leg.amount)), room);
      Json ids = Json::array();
      for (auto& v : world.victims)
      {
        if (wanted <= 0)
          break;
        if (v.status == VictimStatus::Identified && v.position == leg.target)
        {
          v.status = VictimStatus::Carried;
          route.carried.push_back(v.victim_id);
          agent.victim_load += 1.0;
          ids.push_back(v.victim_id);
          --wanted;
        }
      }
      world.log("pickup", id, agent.position, {{"task_id", leg.task_id}, {"victims", ids}});
      break;
    }

    case LegAction::Drop: {
      Json ids = Json::array();
      for (int vid : route.carried)
      {
        for (auto& v : world.victims)
        {
          if (v.victim_id == vid)
            v.status = VictimStatus::Rescued;
        }
        ids.push_back(vid);
      }
      route.carried.clear();
      agent.victim_load = 0.0;
      world.log("drop", id, agent.position, {{"victims", ids}});
      break;
    }

    case LegAction::Explore:
      world.log("explore", id, agent.position, {{"cell", leg.task_id - kExploreTaskOffset}});
      explore_cell(world, leg.task_id - kExploreTaskOffset, id, nullptr);
      break;
  }
}

/// At most one waypoint completes per agent per step so that every event of
/// an agent within a step shares one position.
void advance_agent(WorldState& world, std::size_t a, double dt)
{
  AgentRoute& route = world.routes[a];
  if (route.legs.empty())
    return;
  Agent& agent = world.agents[a];
  const Leg leg = route.legs.front();

  if (!route.at_target)
  {
    const Point delta = leg.target - agent.position;
    const double d = delta.norm();
    const double reach = leg.speed * dt;
    if (d > reach + kEps)
    {
      agent.position += delta * (reach / d);
      return;
    }
    agent.position = leg.target;
    route.at_target = true;
    route.dwell_remaining = leg.dwell;
    if (route.dwell_remaining > kEps)
      return;
  }
  else
  {
    route.dwell_remaining -= dt;
    if (route.dwell_remaining > 1e-9)
      return;
  }

  route.legs.pop_front();
  route.at_target = false;
  route.dwell_remaining = 0.0;
  perform(world, a, leg);
}

void grow_fires(WorldState& world, double dt)
{
  const std::size_t n = world.fires.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    Fire& f = world.fires[i];
    const double grown = std::min(kMaxFireHealth, f.health + f.growth_rate * dt);
    f.accrued_health += grown - f.health;
    f.health = grown;
    if (f.health >= kMaxFireHealth - kEps && !f.has_spread)
      fire_spread(world, i);
  }
}

Json initial_state_json(const WorldState& world)
{
  Json j;
  Json fires = Json::array();
  for (const auto& f : world.fires)
    fires.push_back({f.fire_id, point_json(f.position), f.health});
  Json victims = Json::array();
  for (const auto& v : world.victims)
    victims.push_back({v.victim_id, point_json(v.position)});
  Json agents = Json::array();
  for (const auto& a : world.agents)
    agents.push_back({a.agent_id, a.class_id, point_json(a.position)});
  j["fires"] = fires;
  j["victims"] = victims;
  j["agents"] = agents;
  return j;
}

} // namespace

//==============================================================================
void FireParameters::validate() const
{
  if (!(initial_health > 0.0 && initial_health <= kMaxFireHealth))
    throw ConfigError("fire initial_health must lie in (0, 100]");
  if (!(child_initial_health > 0.0 && child_initial_health <= kMaxFireHealth))
    throw ConfigError("fire child_initial_health must lie in (0, 100]");
  if (growth_rate < 0.0)
    throw ConfigError("fire growth_rate must be non-negative");
  if (!(water_per_health > 0.0))
    throw ConfigError("fire water_per_health must be positive");
  if (spread_radius < 0.0)
    throw ConfigError("fire spread_radius must be non-negative");
  if (max_fires < 0)
    throw ConfigError("fire max_fires must be non-negative");
}

void SimulatorConstants::validate() const
{
  if (!(dt > 0.0))
    throw ConfigError("simulator dt must be positive");
  if (!(time_limit > 0.0))
    throw ConfigError("simulator time_limit must be positive");
  if (sensing_radius < 0.0)
    throw ConfigError("simulator sensing_radius must be non-negative");
  if (handling_time < 0.0)
    throw ConfigError("simulator handling_time must be non-negative");
}

void ScenarioConfig::validate() const
{
  geometry.validate();
  validate_classes(classes);
  fire.validate();
  simulator.validate();
  if (victim_count < 0 || initial_fire_count < 0)
    throw ConfigError("victim and fire counts must be non-negative");
  if (initial_fire_count > fire.max_fires)
    throw ConfigError("initial_fire_count exceeds fire max_fires");
  for (const auto& entry : fleet)
  {
    find_class(classes, entry.class_id);
    if (entry.count < 0)
      throw ConfigError("fleet count for '" + entry.class_id + "' must be non-negative");
  }
}

//==============================================================================
double Fire::required_water() const
{
  if (health <= 0.0)
    return 0.0;
  return std::ceil(health * water_per_health - 1e-9);
}

std::string_view to_string(VictimStatus status)
{
  switch (status)
  {
    case VictimStatus::Hidden: return "hidden";
    case VictimStatus::Identified: return "identified";
    case VictimStatus::Carried: return "carried";
    case VictimStatus::Rescued: return "rescued";
  }
  return "hidden";
}

bool WorldState::complete() const
{
  if (!fires.empty())
    return false;
  if (!std::all_of(explored_cells.begin(), explored_cells.end(), [](bool e) { return e; }))
    return false;
  return std::all_of(victims.begin(), victims.end(), [](const Victim& v) {
    return v.status == VictimStatus::Rescued;
  });
}

int WorldState::victims_rescued() const
{
  return static_cast<int>(std::count_if(victims.begin(), victims.end(), [](const Victim& v) {
    return v.status == VictimStatus::Rescued;
  }));
}

void WorldState::log(std::string event_type, std::int64_t subject_id, const Point& position, Json payload)
{
  trace.push_back({time, std::move(event_type), subject_id, position, std::move(payload)});
}

//==============================================================================
double uniform01(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

WorldState make_world(const ScenarioConfig& scenario, std::uint64_t seed)
{
  scenario.validate();
  WorldState world;
  world.geometry = scenario.geometry;
  world.fire_parameters = scenario.fire;
  world.constants = scenario.simulator;
  world.classes = scenario.classes;
  world.rng.seed(seed);
  world.explored_cells.assign(static_cast<std::size_t>(world.geometry.cell_count()), scenario.simulator.pre_explored);

  const Rect& forest = world.geometry.forest_region;
  for (int i = 0; i < scenario.initial_fire_count; ++i)
  {
    Fire f;
    f.fire_id = world.fires_created++;
    const double x = forest.min.x() + (forest.max.x() - forest.min.x()) * uniform01(world.rng);
    const double y = forest.min.y() + (forest.max.y() - forest.min.y()) * uniform01(world.rng);
    f.position = Point(x, y);
    f.health = f.accrued_health = scenario.fire.initial_health;
    f.growth_rate = scenario.fire.growth_rate;
    f.water_per_health = scenario.fire.water_per_health;
    world.fires.push_back(f);
  }
  for (int i = 0; i < scenario.victim_count; ++i)
  {
    Victim v;
    v.victim_id = i;
    const double x = world.geometry.width * uniform01(world.rng);
    const double y = world.geometry.height * uniform01(world.rng);
    v.position = Point(x, y);
    world.victims.push_back(v);
  }
  AgentId next = 0;
  for (const auto& entry : scenario.fleet)
  {
    for (int k = 0; k < entry.count; ++k)
    {
      Agent a;
      a.agent_id = next++;
      a.class_id = entry.class_id;
      a.position = world.geometry.base_position;
      world.agents.push_back(a);
    }
  }
  world.routes.resize(world.agents.size());
  return world;
}

std::uint64_t initial_state_hash(const WorldState& world)
{
  return fnv1a(initial_state_json(world).dump());
}

//==============================================================================
void step(WorldState& world, double dt)
{
  if (!(dt > 0.0))
    throw ConfigError("step requires dt > 0");
  world.time = snap_time(world.time + dt);
  for (std::size_t a = 0; a < world.agents.size(); ++a)
    advance_agent(world, a, dt);
  grow_fires(world, dt);
  discover(world);
}

void fire_spread(WorldState& world, std::size_t fire_index)
{
  Fire& parent = world.fires[fire_index];
  if (parent.health < kMaxFireHealth - kEps)
    return;
  parent.health = kMaxFireHealth;
  parent.has_spread = true;
  if (world.fires_created >= world.fire_parameters.max_fires)
    return;

  const double r = world.fire_parameters.spread_radius * std::sqrt(uniform01(world.rng));
  const double theta = 2.0 * std::numbers::pi * uniform01(world.rng);
  Fire child;
  child.fire_id = world.fires_created++;
  child.position = world.geometry.clamp(parent.position + r * Point(std::cos(theta), std::sin(theta)));
  child.health = child.accrued_health = world.fire_parameters.child_initial_health;
  child.growth_rate = parent.growth_rate;
  child.water_per_health = parent.water_per_health;
  const int parent_id = parent.fire_id;
  world.fires.push_back(child);
  ++world.fires_spawned;
  world.replan_requested = true;
  world.log("fire_spawned", child.fire_id, child.position,
            {{"parent", parent_id}, {"health", child.health}, {"water_per_health", child.water_per_health},
             {"radius", child.radius()}});
}

std::vector<int> discover(WorldState& world)
{
  std::vector<int> identified;
  const double r = world.constants.sensing_radius;
  for (const auto& agent : world.agents)
  {
    explore_cell(world, world.geometry.cell_index(agent.position), agent.agent_id, &identified);
    for (auto& v : world.victims)
    {
      if (v.status == VictimStatus::Hidden && (v.position - agent.position).norm() <= r)
      {
        v.status = VictimStatus::Identified;
        world.log("victim_identified", v.victim_id, v.position, {{"agent", agent.agent_id}, {"reason", "sensed"}});
        identified.push_back(v.victim_id);
        world.replan_requested = true;
      }
    }
  }
  return identified;
}

std::vector<Task> derive_tasks(const WorldState& world)
{
  std::map<TaskId, double> queued;
  for (const auto& route : world.routes)
  {
    for (const auto& leg : route.legs)
    {
      if (leg.action == LegAction::DeliverWater || leg.action == LegAction::Pickup || leg.action == LegAction::Explore)
        queued[leg.task_id] += leg.amount;
    }
  }
  const auto net = [&](TaskId id, double need) {
    auto it = queued.find(id);
    return it == queued.end() ? need : need - it->second;
  };

  std::vector<Task> tasks;
  const auto add = [&](TaskId id, TaskKind kind, const Point& at, double need) {
    const double remaining = net(id, need);
    if (remaining <= 1e-9)
      return;
    Task t;
    t.task_id = id;
    t.kind = kind;
    t.location = at;
    t.terrain = world.geometry.terrain_at(at);
    t.required_effort = need;
    t.remaining_effort = remaining;
    tasks.push_back(t);
  };

  for (const auto& f : world.fires)
    add(f.fire_id, TaskKind::ExtinguishFire, f.position, f.required_water());
  for (const auto& s : victim_sites(world))
    add(s.task_id, TaskKind::RescueVictim, s.position, s.available);
  for (int c = 0; c < world.geometry.cell_count(); ++c)
  {
    if (!world.explored_cells[static_cast<std::size_t>(c)])
      add(kExploreTaskOffset + c, TaskKind::Explore, world.geometry.cell_center(c), 1.0);
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.task_id < b.task_id; });
  return tasks;
}

void execute_assignment(WorldState& world, const Assignment& assignment)
{
  const std::size_t a = agent_index(world, assignment.agent_id);
  Agent& agent = world.agents[a];
  AgentRoute& route = world.routes[a];
  const auto& cls = find_class(world.classes, agent.class_id);
  const Point base = world.geometry.base_position;
  const double h = world.constants.handling_time;

  Task task;
  task.task_id = assignment.task_id;
  if (assignment.task_id < kVictimTaskOffset)
  {
    const Fire* fire = find_fire(world, assignment.task_id);
    if (!fire)
      throw InfeasibleAction("fire " + std::to_string(assignment.task_id) + " is not active");
    task.kind = TaskKind::ExtinguishFire;
    task.location = fire->position;
  }
  else if (assignment.task_id < kExploreTaskOffset)
  {
    const int vid = assignment.task_id - kVictimTaskOffset;
    auto it = std::find_if(world.victims.begin(), world.victims.end(), [&](const Victim& v) { return v.victim_id == vid; });
    if (it == world.victims.end())
      throw InfeasibleAction("unknown victim " + std::to_string(vid));
    task.kind = TaskKind::RescueVictim;
    task.location = it->position;
  }
  else
  {
    const int cell = assignment.task_id - kExploreTaskOffset;
    if (cell < 0 || cell >= world.geometry.cell_count())
      throw InfeasibleAction("unknown cell " + std::to_string(cell));
    task.kind = TaskKind::Explore;
    task.location = world.geometry.cell_center(cell);
  }
  task.terrain = world.geometry.terrain_at(task.location);
  if (!is_dispatchable(cls, task))
    throw InfeasibleAction("agent " + std::to_string(agent.agent_id) + " cannot serve task " + std::to_string(task.task_id));
  const double cap = capacity_for(cls, task.kind);
  if (!(assignment.contribution > 0.0) || assignment.contribution > cap + 1e-9)
    throw InfeasibleAction("contribution outside (0, capacity]");

  const double v = cls.capabilities.speed_in(task.terrain);
  const double amount = assignment.contribution;
  bool drop_first = false;
  switch (task.kind)
  {
    case TaskKind::ExtinguishFire:
      // Water is free at the base, so the tank is always filled: the fire
      // keeps growing while the agent is on its way.
      route.legs.push_back({base, v, 0.0, LegAction::LoadWater, task.task_id, cap});
      route.legs.push_back({task.location, v, h, LegAction::DeliverWater, task.task_id, cap});
      break;
    case TaskKind::RescueVictim:
      // Trips end empty at the base, so only an agent that starts out loaded
      // needs the extra hospital visit.
      if (route.legs.empty() && agent.victim_load + 1e-9 >= cls.capabilities.rescue_capacity)
      {
        drop_first = true;
        route.legs.push_back({world.geometry.hospital_position, v, 0.0, LegAction::Drop, -1, 0.0});
      }
      route.legs.push_back({task.location, v, h, LegAction::Pickup, task.task_id, amount});
      route.legs.push_back({world.geometry.hospital_position, v, 0.0, LegAction::Drop, task.task_id, 0.0});
      break;
    case TaskKind::Explore:
      route.legs.push_back({task.location, v, h, LegAction::Explore, task.task_id, amount});
      break;
  }
  route.legs.push_back({base, v, 0.0, LegAction::None, task.task_id, 0.0});
  agent.busy_until = predicted_free_time(world, a);

  world.log("dispatch", agent.agent_id, agent.position,
            {{"task_id", task.task_id}, {"kind", std::string(to_string(task.kind))},
             {"contribution", amount}, {"planned_start", assignment.start_time},
             {"planned_duration", assignment.duration}, {"drop_first", drop_first}});
}

double predicted_free_time(const WorldState& world, std::size_t agent_index)
{
  const AgentRoute& route = world.routes[agent_index];
  double t = world.time;
  Point at = world.agents[agent_index].position;
  bool first = true;
  for (const auto& leg : route.legs)
  {
    if (first && route.at_target)
      t += std::max(0.0, route.dwell_remaining);
    else
      t += (leg.target - at).norm() / leg.speed + leg.dwell;
    at = leg.target;
    first = false;
  }
  return t;
}

WorldSnapshot make_snapshot(const WorldState& world)
{
  WorldSnapshot s;
  s.now = world.time;
  s.classes = world.classes;
  s.agents = world.agents;
  for (std::size_t a = 0; a < s.agents.size(); ++a)
    s.agents[a].busy_until = predicted_free_time(world, a);
  s.tasks = derive_tasks(world);
  s.geometry = world.geometry;
  s.handling_time = world.constants.handling_time;
  return s;
}

//==============================================================================
EpisodeResult run_episode(const ScenarioConfig& scenario, Planner& planner, std::uint64_t seed)
{
  WorldState world = make_world(scenario, seed);
  const auto& k = world.constants;

  world.log("episode_start", -1, world.geometry.base_position,
            {{"seed", seed}, {"planner", planner.label()},
             {"initial_state_hash", initial_state_hash(world)},
             {"base", point_json(world.geometry.base_position)},
             {"hospital", point_json(world.geometry.hospital_position)},
             {"cell_count", world.geometry.cell_count()}, {"victim_count", scenario.victim_count},
             {"dt", k.dt}, {"time_limit", k.time_limit}});
  for (const auto& a : world.agents)
  {
    const auto& c = find_class(world.classes, a.class_id);
    world.log("agent_spawn", a.agent_id, a.position,
              {{"class", a.class_id}, {"max_speed", c.capabilities.max_speed()},
               {"water_capacity", c.capabilities.water_capacity},
               {"rescue_capacity", c.capabilities.rescue_capacity}});
  }
  for (const auto& f : world.fires)
  {
    world.log("fire_spawned", f.fire_id, f.position,
              {{"parent", nullptr}, {"health", f.health}, {"water_per_health", f.water_per_health},
               {"radius", f.radius()}});
  }
  for (const auto& v : world.victims)
    world.log("victim_spawned", v.victim_id, v.position);
  if (k.pre_explored)
  {
    for (int c = 0; c < world.geometry.cell_count(); ++c)
      world.log("cell_explored", c, world.geometry.cell_center(c), {{"agent", -1}});
  }
  discover(world);

  EpisodeResult result;
  double next_periodic = 0.0;
  const double interval = planner.replan_interval();
  while (true)
  {
    if (world.complete())
    {
      result.completed = true;
      result.makespan = world.time;
      break;
    }
    if (world.time >= k.time_limit - 1e-9)
    {
      result.completed = false;
      result.makespan = k.time_limit;
      break;
    }

    const bool periodic = world.time >= next_periodic - 1e-9;
    if (periodic || world.replan_requested)
    {
      const auto snapshot = make_snapshot(world);
      const auto decision = planner.decide(snapshot);
      for (const auto& assignment : decision.assignments)
        execute_assignment(world, assignment);
      ++result.replans;
      result.nodes_expanded += decision.nodes_expanded;
      world.log("replan", -1, world.geometry.base_position,
                {{"planner", planner.label()}, {"trigger", periodic ? "periodic" : "event"},
                 {"open_tasks", snapshot.tasks.size()}, {"committed", decision.assignments.size()},
                 {"nodes_expanded", decision.nodes_expanded},
                 {"optimal_within_depth", decision.optimal_within_depth}, {"bound", decision.bound_J}});
      world.replan_requested = false;
      if (periodic)
      {
        while (next_periodic <= world.time + 1e-9)
          next_periodic += interval;
      }
    }
    step(world, k.dt);
  }

  result.fires_spawned = world.fires_spawned;
  result.victims_rescued = world.victims_rescued();
  world.log("episode_end", -1, world.geometry.base_position,
            {{"makespan", result.makespan}, {"fires_spawned", result.fires_spawned},
             {"victims_rescued", result.victims_rescued}, {"completed", result.completed},
             {"replans", result.replans}});
  result.trace = std::move(world.trace);
  return result;
}

} // namespace rhp
