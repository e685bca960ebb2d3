#include <rhp/planner.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace rhp {

namespace {

constexpr double kTimeTolerance = 1e-9;
constexpr double kEffortTolerance = 1e-9;

bool lexicographically_before(
  const PlanningContext& ctx, std::size_t a1, std::size_t t1, std::size_t a2, std::size_t t2)
{
  return std::make_pair(ctx.agent(a1).agent_id, ctx.task(t1).task_id)
       < std::make_pair(ctx.agent(a2).agent_id, ctx.task(t2).task_id);
}

} // namespace

//==============================================================================
PlanningContext::PlanningContext(const WorldSnapshot& snapshot)
: _snapshot(&snapshot)
{
  const auto& classes = snapshot.classes;
  for (const auto& agent : snapshot.agents)
  {
    const auto& c = find_class(classes, agent.class_id);
    _agent_class.push_back(static_cast<std::size_t>(&c - classes.data()));
  }

  for (const auto& task : snapshot.tasks)
  {
    if (!(task.remaining_effort > kEffortTolerance))
      continue;
    const bool servable = std::any_of(
      _agent_class.begin(), _agent_class.end(),
      [&](std::size_t c) { return is_dispatchable(classes[c], task); });
    if (servable)
      _tasks.push_back(task);
  }
  std::sort(_tasks.begin(), _tasks.end(), [](const Task& a, const Task& b) {
    return a.task_id < b.task_id;
  });

  const auto na = static_cast<Eigen::Index>(snapshot.agents.size());
  const auto nt = static_cast<Eigen::Index>(_tasks.size());
  _duration = Eigen::MatrixXd::Constant(na, nt, std::numeric_limits<double>::infinity());
  _capacity = Eigen::MatrixXd::Zero(na, nt);
  for (Eigen::Index a = 0; a < na; ++a)
  {
    const auto& c = classes[_agent_class[static_cast<std::size_t>(a)]];
    for (Eigen::Index t = 0; t < nt; ++t)
    {
      const auto& task = _tasks[static_cast<std::size_t>(t)];
      if (!is_dispatchable(c, task))
        continue;
      _duration(a, t) = trip_duration(c, task, snapshot.geometry, snapshot.handling_time);
      _capacity(a, t) = capacity_for(c, task.kind);
    }
  }
}

std::vector<double> PlanningContext::initial_free_times() const
{
  std::vector<double> y;
  y.reserve(agent_count());
  for (const auto& agent : _snapshot->agents)
    y.push_back(std::max(_snapshot->now, agent.busy_until));
  return y;
}

//==============================================================================
bool PlanNode::has_remaining_tasks() const
{
  return std::any_of(remaining_efforts.begin(), remaining_efforts.end(), [](double r) {
    return r > kEffortTolerance;
  });
}

double PlanNode::max_free_time() const
{
  double y = 0.0;
  for (double v : agent_free_times)
    y = std::max(y, v);
  return y;
}

PlanNode make_root(const PlanningContext& ctx)
{
  PlanNode root;
  root.agent_free_times = ctx.initial_free_times();
  root.remaining_efforts.reserve(ctx.task_count());
  for (const auto& t : ctx.tasks())
    root.remaining_efforts.push_back(t.remaining_effort);
  root.bound_J = root.max_free_time();
  return root;
}

//==============================================================================
PlannerConfig PlannerConfig::with_depth(std::size_t depth)
{
  PlannerConfig config;
  config.planning_depth = depth;
  config.commit_count = std::max<std::size_t>(1, depth / 3);
  return config;
}

void PlannerConfig::validate() const
{
  if (planning_depth < 1)
    throw ConfigError("planning depth must be at least 1");
  if (commit_count < 1 || commit_count > planning_depth)
    throw ConfigError("commit count must lie in [1, planning depth]");
  if (node_budget < 1)
    throw ConfigError("node budget must be at least 1");
  if (!(replan_interval > 0.0))
    throw ConfigError("replan interval must be positive");
}

//==============================================================================
CostToGo lp_cost_to_go(const HeuristicOptions& options)
{
  return [options](const PlanningContext& ctx, const PlanNode& node) {
    const auto& snap = ctx.snapshot();
    std::vector<LoadBalanceProblem::AgentState> agents;
    agents.reserve(ctx.agent_count());
    for (std::size_t a = 0; a < ctx.agent_count(); ++a)
      agents.push_back({ctx.agent(a).agent_id, ctx.class_index(a), node.agent_free_times[a]});

    std::vector<Task> tasks = ctx.tasks();
    for (std::size_t t = 0; t < tasks.size(); ++t)
      tasks[t].remaining_effort = node.remaining_efforts[t] > kEffortTolerance ? node.remaining_efforts[t] : 0.0;

    const auto problem = make_load_balance_problem(
      snap.classes, agents, tasks, snap.geometry, snap.handling_time, options.trip_times);
    return estimate_cost_to_go(problem, options).makespan_bound;
  };
}

//==============================================================================
std::size_t select_agent(const PlanNode& node, const PlanningContext& ctx)
{
  bool found = false;
  std::size_t best_a = 0;
  std::size_t best_t = 0;
  double best = 0.0;
  for (std::size_t a = 0; a < ctx.agent_count(); ++a)
  {
    for (std::size_t t = 0; t < ctx.task_count(); ++t)
    {
      if (!(node.remaining_efforts[t] > kEffortTolerance) || !ctx.dispatchable(t, a))
        continue;
      const double completion = ctx.start_time(t, a, node.agent_free_times[a]) + ctx.duration(t, a);
      if (!found || completion < best - kTimeTolerance
          || (completion <= best + kTimeTolerance && lexicographically_before(ctx, a, t, best_a, best_t)))
      {
        found = true;
        best = completion;
        best_a = a;
        best_t = t;
      }
    }
  }
  if (!found)
    throw NoDispatchablePair("no agent can serve any remaining task");
  return best_a;
}

std::vector<std::size_t> candidate_tasks(
  const PlanNode& node, std::size_t agent, const PlanningContext& ctx)
{
  double earliest = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < ctx.task_count(); ++t)
  {
    if (node.remaining_efforts[t] > kEffortTolerance && ctx.dispatchable(t, agent))
    {
      earliest = std::min(
        earliest, ctx.start_time(t, agent, node.agent_free_times[agent]) + ctx.duration(t, agent));
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < ctx.task_count(); ++t)
  {
    if (node.remaining_efforts[t] > kEffortTolerance && ctx.dispatchable(t, agent)
        && ctx.start_time(t, agent, node.agent_free_times[agent]) <= earliest + kTimeTolerance)
      out.push_back(t);
  }
  // Context tasks are already sorted by id.
  return out;
}

std::vector<PlanNode> expand(
  const PlanNode& node,
  const PlanningContext& ctx,
  const PlannerConfig& config,
  const CostToGo& heuristic)
{
  std::vector<PlanNode> children;
  if (node.depth >= config.planning_depth || !node.has_remaining_tasks())
    return children;

  const std::size_t a = select_agent(node, ctx);
  for (std::size_t t : candidate_tasks(node, a, ctx))
  {
    PlanNode child;
    child.parent = std::nullopt;
    Assignment assignment;
    assignment.agent_id = ctx.agent(a).agent_id;
    assignment.task_id = ctx.task(t).task_id;
    assignment.contribution = std::min(ctx.capacity(t, a), node.remaining_efforts[t]);
    assignment.start_time = ctx.start_time(t, a, node.agent_free_times[a]);
    assignment.duration = ctx.duration(t, a);
    child.new_assignment = assignment;

    child.agent_free_times = node.agent_free_times;
    child.agent_free_times[a] = assignment.end_time();
    child.remaining_efforts = node.remaining_efforts;
    double& r = child.remaining_efforts[t];
    r -= assignment.contribution;
    if (r <= kEffortTolerance)
      r = 0.0;
    child.depth = node.depth + 1;

    if (!child.has_remaining_tasks())
    {
      child.cost_to_go = child.max_free_time();
      child.bound_J = child.cost_to_go;
    }
    else
    {
      child.cost_to_go = heuristic(ctx, child);
      child.bound_J = std::max(node.bound_J, child.cost_to_go);
    }
    children.push_back(std::move(child));
  }
  return children;
}

//==============================================================================
namespace {

struct SearchRecord
{
  std::int64_t parent = -1;
  Assignment assignment;
  std::size_t agent = 0;
  std::size_t task = 0;
  std::size_t depth = 0;
  double bound_J = 0.0;
  bool expanded = false;
};

struct FrontierEntry
{
  double bound_J;
  std::size_t depth;
  std::size_t index;
};

struct FrontierOrder
{
  // priority_queue keeps the "largest" on top; invert for min-J first.
  bool operator()(const FrontierEntry& a, const FrontierEntry& b) const
  {
    if (a.bound_J != b.bound_J)
      return a.bound_J > b.bound_J;
    if (a.depth != b.depth)
      return a.depth < b.depth;
    return a.index > b.index;
  }
};

std::size_t find_agent(const PlanningContext& ctx, AgentId id)
{
  for (std::size_t a = 0; a < ctx.agent_count(); ++a)
  {
    if (ctx.agent(a).agent_id == id)
      return a;
  }
  return 0;
}

std::size_t find_task(const PlanningContext& ctx, TaskId id)
{
  for (std::size_t t = 0; t < ctx.task_count(); ++t)
  {
    if (ctx.task(t).task_id == id)
      return t;
  }
  return 0;
}

class Search
{
public:
  Search(const PlanningContext& ctx, const PlannerConfig& config, const CostToGo& heuristic)
  : _ctx(ctx), _config(config), _heuristic(heuristic)
  {}

  PlanResult run()
  {
    PlanNode root = make_root(_ctx);
    PlanResult result;
    if (!root.has_remaining_tasks())
    {
      result.bound_J = root.max_free_time();
      result.complete = true;
      return result;
    }
    root.bound_J = std::max(root.max_free_time(), _heuristic(_ctx, root));
    _records.push_back({-1, {}, 0, 0, 0, root.bound_J, false});
    _frontier.push({root.bound_J, 0, 0});

    // Dive along the cheapest child first so that an incumbent exists early;
    // every child seen on the way still enters the frontier.
    bool budget_hit = false;
    std::int64_t current = 0;
    while (current >= 0)
    {
      if (_expanded >= _config.node_budget)
      {
        budget_hit = true;
        break;
      }
      current = expand_record(static_cast<std::size_t>(current));
    }

    while (!budget_hit && !_frontier.empty())
    {
      const FrontierEntry top = _frontier.top();
      if (_config.pruning && _best_leaf >= 0 && top.bound_J >= _records[_best_leaf].bound_J)
        break;
      _frontier.pop();
      if (_records[top.index].expanded)
        continue;
      if (_expanded >= _config.node_budget)
      {
        budget_hit = true;
        break;
      }
      expand_record(top.index);
    }

    std::int64_t chosen = _best_leaf;
    if (chosen < 0)
    {
      // Budget ran out before any leaf: fall back to the most promising
      // open node.
      chosen = _frontier.empty() ? 0 : static_cast<std::int64_t>(_frontier.top().index);
    }
    result.schedule = path(chosen);
    result.bound_J = _records[chosen].bound_J;
    result.nodes_expanded = _expanded;
    result.optimal_within_depth = !budget_hit;
    result.complete = chosen == _best_leaf && _best_leaf_complete;
    return result;
  }

private:
  /// Expands a stored node and returns the cheapest child that went into the
  /// frontier, or -1 when the cheapest child is a leaf or nothing survived.
  std::int64_t expand_record(std::size_t index)
  {
    const PlanNode node = materialize(index);
    _records[index].expanded = true;
    ++_expanded;
    // Children tied on J are told apart by their own cost-to-go.
    using Key = std::pair<double, double>;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::int64_t best_open = -1;
    Key best_open_key{inf, inf};
    Key best_leaf_key{inf, inf};
    for (auto& child : expand(node, _ctx, _config, _heuristic))
    {
      const Key key{child.bound_J, child.cost_to_go};
      const std::int64_t stored = admit(index, child);
      if (stored < 0)
      {
        best_leaf_key = std::min(best_leaf_key, key);
        continue;
      }
      if (key < best_open_key)
      {
        best_open_key = key;
        best_open = stored;
      }
    }
    return best_open_key <= best_leaf_key ? best_open : -1;
  }

  /// Stores the child; returns its index if it joined the frontier, -1 if it
  /// was a leaf or was pruned.
  std::int64_t admit(std::size_t parent, const PlanNode& child)
  {
    const bool complete = !child.has_remaining_tasks();
    const bool leaf = complete || child.depth >= _config.planning_depth;
    const double incumbent =
      _best_leaf >= 0 ? _records[_best_leaf].bound_J : std::numeric_limits<double>::infinity();

    if (leaf)
    {
      if (child.bound_J < incumbent)
      {
        _best_leaf = store(parent, child);
        _best_leaf_complete = complete;
      }
      return -1;
    }
    if (_config.pruning && child.bound_J >= incumbent)
      return -1;
    const auto index = store(parent, child);
    _frontier.push({child.bound_J, child.depth, static_cast<std::size_t>(index)});
    return index;
  }

  std::int64_t store(std::size_t parent, const PlanNode& child)
  {
    SearchRecord rec;
    rec.parent = static_cast<std::int64_t>(parent);
    rec.assignment = *child.new_assignment;
    rec.agent = find_agent(_ctx, rec.assignment.agent_id);
    rec.task = find_task(_ctx, rec.assignment.task_id);
    rec.depth = child.depth;
    rec.bound_J = child.bound_J;
    _records.push_back(rec);
    return static_cast<std::int64_t>(_records.size() - 1);
  }

  PlanNode materialize(std::size_t index) const
  {
    PlanNode node = make_root(_ctx);
    std::vector<std::size_t> chain;
    for (auto i = static_cast<std::int64_t>(index); i > 0; i = _records[i].parent)
      chain.push_back(static_cast<std::size_t>(i));
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    {
      const auto& rec = _records[*it];
      node.agent_free_times[rec.agent] = rec.assignment.end_time();
      double& r = node.remaining_efforts[rec.task];
      r -= rec.assignment.contribution;
      if (r <= kEffortTolerance)
        r = 0.0;
    }
    node.depth = _records[index].depth;
    node.bound_J = _records[index].bound_J;
    if (index > 0)
    {
      node.parent = static_cast<std::size_t>(_records[index].parent);
      node.new_assignment = _records[index].assignment;
    }
    return node;
  }

  std::vector<Assignment> path(std::int64_t index) const
  {
    std::vector<Assignment> out;
    for (std::int64_t i = index; i > 0; i = _records[i].parent)
      out.push_back(_records[i].assignment);
    std::reverse(out.begin(), out.end());
    return out;
  }

  const PlanningContext& _ctx;
  const PlannerConfig& _config;
  const CostToGo& _heuristic;
  std::vector<SearchRecord> _records;
  std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, FrontierOrder> _frontier;
  std::int64_t _best_leaf = -1;
  bool _best_leaf_complete = false;
  std::size_t _expanded = 0;
};

} // namespace

PlanResult plan(const WorldSnapshot& snapshot, const PlannerConfig& config)
{
  return plan(snapshot, config, lp_cost_to_go(config.heuristic));
}

PlanResult plan(const WorldSnapshot& snapshot, const PlannerConfig& config, const CostToGo& heuristic)
{
  config.validate();
  const PlanningContext ctx(snapshot);
  return Search(ctx, config, heuristic).run();
}

std::vector<Assignment> commit_prefix(const PlanResult& result, const PlannerConfig& config)
{
  const std::size_t n = std::min(config.commit_count, result.schedule.size());
  return {result.schedule.begin(), result.schedule.begin() + static_cast<std::ptrdiff_t>(n)};
}

//==============================================================================
std::vector<Assignment> greedy_assign(const WorldSnapshot& snapshot)
{
  std::vector<std::size_t> order(snapshot.agents.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return snapshot.agents[a].agent_id < snapshot.agents[b].agent_id;
  });

  std::vector<Task> tasks = snapshot.tasks;
  std::vector<Assignment> out;
  for (std::size_t i : order)
  {
    const Agent& agent = snapshot.agents[i];
    if (agent.busy_until > snapshot.now + kTimeTolerance)
      continue;
    const auto& c = find_class(snapshot.classes, agent.class_id);

    Task* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (auto& task : tasks)
    {
      if (!(task.remaining_effort > kEffortTolerance) || !is_dispatchable(c, task))
        continue;
      const double d = (task.location - agent.position).norm();
      if (d < best || (d == best && nearest && task.task_id < nearest->task_id))
      {
        best = d;
        nearest = &task;
      }
    }
    if (!nearest)
      continue;

    Assignment a;
    a.agent_id = agent.agent_id;
    a.task_id = nearest->task_id;
    a.contribution = std::min(capacity_for(c, nearest->kind), nearest->remaining_effort);
    a.start_time = std::max(snapshot.now, agent.busy_until);
    a.duration = trip_duration(c, *nearest, snapshot.geometry, snapshot.handling_time);
    nearest->remaining_effort -= a.contribution;
    out.push_back(a);
  }
  return out;
}

//==============================================================================
RecedingHorizonPlanner::RecedingHorizonPlanner(PlannerConfig config)
: _config(std::move(config)), _heuristic(lp_cost_to_go(_config.heuristic))
{
  _config.validate();
}

std::string RecedingHorizonPlanner::label() const
{
  return "rhp" + std::to_string(_config.planning_depth);
}

PlannerDecision RecedingHorizonPlanner::decide(const WorldSnapshot& snapshot)
{
  const auto result = plan(snapshot, _config, _heuristic);
  PlannerDecision decision;
  decision.assignments = commit_prefix(result, _config);
  decision.nodes_expanded = result.nodes_expanded;
  decision.optimal_within_depth = result.optimal_within_depth;
  decision.bound_J = result.bound_J;
  return decision;
}

PlannerDecision GreedyPlanner::decide(const WorldSnapshot& snapshot)
{
  PlannerDecision decision;
  decision.assignments = greedy_assign(snapshot);
  return decision;
}

} // namespace rhp
