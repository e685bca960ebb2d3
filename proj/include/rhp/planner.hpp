#pragma once

#include <rhp/domain.hpp>
#include <rhp/heuristic.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rhp {

/// Immutable view of the world handed to a planner.
struct WorldSnapshot
{
  double now = 0.0;
  std::vector<AgentClass> classes;
  std::vector<Agent> agents;
  std::vector<Task> tasks;
  WorldGeometry geometry;
  double handling_time = kDefaultHandlingTime;
};

//==============================================================================
/// Per-snapshot tables shared by every node of one search: open tasks,
/// class lookup, trip durations and per-trip capacities.
class PlanningContext
{
public:
  explicit PlanningContext(const WorldSnapshot& snapshot);

  const WorldSnapshot& snapshot() const { return *_snapshot; }
  std::size_t agent_count() const { return _snapshot->agents.size(); }
  std::size_t task_count() const { return _tasks.size(); }

  const Agent& agent(std::size_t a) const { return _snapshot->agents[a]; }
  const Task& task(std::size_t t) const { return _tasks[t]; }
  const std::vector<Task>& tasks() const { return _tasks; }
  std::size_t class_index(std::size_t a) const { return _agent_class[a]; }

  bool dispatchable(std::size_t t, std::size_t a) const { return _capacity(a, t) > 0.0; }
  double duration(std::size_t t, std::size_t a) const { return _duration(a, t); }
  double capacity(std::size_t t, std::size_t a) const { return _capacity(a, t); }

  /// y_ta: the agent's free time or the task's release, whichever is later.
  double start_time(std::size_t t, std::size_t /*a*/, double agent_free_time) const
  {
    return std::max(agent_free_time, _tasks[t].release_time);
  }

  /// Agents' free times at the root of the search.
  std::vector<double> initial_free_times() const;

private:
  const WorldSnapshot* _snapshot;
  std::vector<Task> _tasks;
  std::vector<std::size_t> _agent_class;
  Eigen::MatrixXd _duration;  // agents x tasks
  Eigen::MatrixXd _capacity;  // agents x tasks, zero when not dispatchable
};

//==============================================================================
/// A partial schedule. Vectors are indexed like the PlanningContext.
struct PlanNode
{
  std::optional<std::size_t> parent;
  std::optional<Assignment> new_assignment;
  std::vector<double> agent_free_times;
  std::vector<double> remaining_efforts;
  std::size_t depth = 0;
  /// h: the cost-to-go estimate of this node alone.
  double cost_to_go = 0.0;
  /// J: max of the parent's J and h, so bounds never decrease along a path.
  double bound_J = 0.0;

  bool has_remaining_tasks() const;
  double max_free_time() const;
};

PlanNode make_root(const PlanningContext& ctx);

enum class TieBreak
{
  /// Lowest (agent_id, task_id) among equal keys; frontier ties prefer
  /// deeper nodes, then creation order.
  Lexicographic,
};

struct PlannerConfig
{
  std::size_t planning_depth = 10;
  std::size_t commit_count = 3;
  std::size_t node_budget = 50'000;
  double replan_interval = 5.0;
  TieBreak tie_break = TieBreak::Lexicographic;
  /// Disabling turns the search into exhaustive enumeration within depth.
  bool pruning = true;
  HeuristicOptions heuristic;

  static constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

  /// commit_count defaults to max(1, depth / 3).
  static PlannerConfig with_depth(std::size_t depth);

  /// Throws ConfigError.
  void validate() const;
};

struct PlanResult
{
  std::vector<Assignment> schedule;
  double bound_J = 0.0;
  std::size_t nodes_expanded = 0;
  bool optimal_within_depth = true;
  /// The returned schedule covers every open task.
  bool complete = false;
};

/// Cost-to-go evaluated on a node's state.
using CostToGo = std::function<double(const PlanningContext&, const PlanNode&)>;

/// The load-balancing LP on the node's free times and remaining efforts.
CostToGo lp_cost_to_go(const HeuristicOptions& options = {});

//==============================================================================
/// Agent index a* minimizing y_ta + T_ta. Throws NoDispatchablePair.
std::size_t select_agent(const PlanNode& node, const PlanningContext& ctx);

/// Open tasks the agent can start before its earliest completion, by task id.
std::vector<std::size_t> candidate_tasks(
  const PlanNode& node, std::size_t agent, const PlanningContext& ctx);

/// One child per candidate task of the selected agent.
std::vector<PlanNode> expand(
  const PlanNode& node,
  const PlanningContext& ctx,
  const PlannerConfig& config,
  const CostToGo& heuristic);

/// Best-first branch and bound over partial schedules.
PlanResult plan(const WorldSnapshot& snapshot, const PlannerConfig& config);
PlanResult plan(const WorldSnapshot& snapshot, const PlannerConfig& config, const CostToGo& heuristic);

std::vector<Assignment> commit_prefix(const PlanResult& result, const PlannerConfig& config);

/// Each idle agent, in id order, takes the nearest dispatchable task.
std::vector<Assignment> greedy_assign(const WorldSnapshot& snapshot);

//==============================================================================
struct PlannerDecision
{
  std::vector<Assignment> assignments;
  std::size_t nodes_expanded = 0;
  bool optimal_within_depth = true;
  double bound_J = 0.0;
};

class Planner
{
public:
  virtual ~Planner() = default;
  virtual std::string label() const = 0;
  virtual PlannerDecision decide(const WorldSnapshot& snapshot) = 0;
  virtual double replan_interval() const = 0;
};

class RecedingHorizonPlanner final : public Planner
{
public:
  explicit RecedingHorizonPlanner(PlannerConfig config);

  std::string label() const override;
  PlannerDecision decide(const WorldSnapshot& snapshot) override;
  double replan_interval() const override { return _config.replan_interval; }
  const PlannerConfig& config() const { return _config; }

private:
  PlannerConfig _config;
  CostToGo _heuristic;
};

class GreedyPlanner final : public Planner
{
public:
  explicit GreedyPlanner(double replan_interval = 5.0) : _interval(replan_interval) {}

  std::string label() const override { return "greedy"; }
  PlannerDecision decide(const WorldSnapshot& snapshot) override;
  double replan_interval() const override { return _interval; }

private:
  double _interval;
};

} // namespace rhp
