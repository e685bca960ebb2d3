#include <rhp/heuristic.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace rhp {

void LoadBalanceProblem::validate() const
{
  const std::size_t nt = tasks.size();
  for (const auto& t : tasks)
  {
    if (!(t.remaining_effort > 0.0))
      throw InfeasibleHeuristic("task " + std::to_string(t.task_id) + " has no remaining effort");
  }
  for (const auto& c : classes)
  {
    if (c.capacity.size() != nt || c.trip_time.size() != nt)
      throw InfeasibleHeuristic("class '" + c.class_id + "' terms do not match the task list");
    for (std::size_t t = 0; t < nt; ++t)
    {
      if (c.capacity[t] < 0.0)
        throw InfeasibleHeuristic("negative capacity for class '" + c.class_id + "'");
      if (c.capacity[t] > 0.0 && !(c.trip_time[t] > 0.0))
        throw InfeasibleHeuristic("class '" + c.class_id + "' has a non-positive trip time");
    }
  }
  for (const auto& a : agents)
  {
    if (a.class_index >= classes.size())
      throw InfeasibleHeuristic("agent " + std::to_string(a.agent_id) + " has no class");
  }
}

double LoadBalanceProblem::max_free_time() const
{
  double y = 0.0;
  for (const auto& a : agents)
    y = std::max(y, a.free_time);
  return y;
}

//==============================================================================
double trip_time_lower_bound(
  const AgentClass& agent_class,
  TaskKind kind,
  std::span<const Task> targets,
  const WorldGeometry& geometry,
  double handling_time)
{
  double d_min = std::numeric_limits<double>::infinity();
  double v_max = 0.0;
  for (const auto& task : targets)
  {
    if (task.kind != kind || !is_dispatchable(agent_class, task))
      continue;
    d_min = std::min(d_min, (task.location - geometry.base_position).norm());
    v_max = std::max(v_max, agent_class.capabilities.speed_in(task.terrain));
  }
  if (!(v_max > 0.0))
  {
    throw NoFeasibleTerrain(
      "class '" + agent_class.class_id + "' cannot reach any "
      + std::string(to_string(kind)) + " target");
  }
  return 2.0 * d_min / v_max + handling_time;
}

//==============================================================================
lp::LPStandardFormd build_lp(const LoadBalanceProblem& problem)
{
  problem.validate();
  const std::size_t nt = problem.tasks.size();
  const std::size_t nc = problem.classes.size();
  const std::size_t na = problem.agents.size();
  const Eigen::Index nvar = makespan_index(problem) + 1;

  auto lp = lp::LPStandardFormd::with_variables(nvar);
  lp.objective(makespan_index(problem)) = 1.0;

  // Coverage: sum_c C n >= R, written as -sum_c C n <= -R. Then makespan:
  // y_j + sum_t T m <= s.
  lp.ub_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nt + na), nvar);
  lp.ub_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nt + na));
  for (std::size_t t = 0; t < nt; ++t)
  {
    const auto row = static_cast<Eigen::Index>(t);
    for (std::size_t c = 0; c < nc; ++c)
      lp.ub_matrix(row, class_load_index(problem, c, t)) = -problem.classes[c].capacity[t];
    lp.ub_rhs(row) = -problem.tasks[t].remaining_effort;
  }
  for (std::size_t j = 0; j < na; ++j)
  {
    const auto row = static_cast<Eigen::Index>(nt + j);
    const auto& terms = problem.classes[problem.agents[j].class_index];
    for (std::size_t t = 0; t < nt; ++t)
      lp.ub_matrix(row, agent_load_index(problem, j, t)) = terms.trip_time[t];
    lp.ub_matrix(row, makespan_index(problem)) = -1.0;
    lp.ub_rhs(row) = -problem.agents[j].free_time;
  }

  // Class balance: sum_j B_j^(c) m_{j,t} - n_{c,t} = 0.
  lp.eq_matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc * nt), nvar);
  lp.eq_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nc * nt));
  for (std::size_t c = 0; c < nc; ++c)
  {
    for (std::size_t t = 0; t < nt; ++t)
    {
      const auto row = static_cast<Eigen::Index>(c * nt + t);
      lp.eq_matrix(row, class_load_index(problem, c, t)) = -1.0;
      for (std::size_t j = 0; j < na; ++j)
      {
        if (problem.agents[j].class_index == c)
          lp.eq_matrix(row, agent_load_index(problem, j, t)) = 1.0;
      }
    }
  }
  return lp;
}

namespace {

//==============================================================================
HeuristicValue solve_full(const LoadBalanceProblem& problem, const lp::SolverOptions& solver)
{
  const auto lp = build_lp(problem);
  const auto result = lp::solve(lp, solver);
  if (result.status != lp::Status::Optimal)
    throw InfeasibleHeuristic(std::string("load balancing LP is ") + lp::to_string(result.status));

  const std::size_t nt = problem.tasks.size();
  HeuristicValue value;
  value.makespan_bound = result.solution(makespan_index(problem));
  value.per_agent_load.resize(static_cast<Eigen::Index>(problem.agents.size()), static_cast<Eigen::Index>(nt));
  value.per_class_load.resize(static_cast<Eigen::Index>(problem.classes.size()), static_cast<Eigen::Index>(nt));
  for (std::size_t t = 0; t < nt; ++t)
  {
    for (std::size_t j = 0; j < problem.agents.size(); ++j)
      value.per_agent_load(j, t) = std::max(0.0, result.solution(agent_load_index(problem, j, t)));
    for (std::size_t c = 0; c < problem.classes.size(); ++c)
      value.per_class_load(c, t) = std::max(0.0, result.solution(class_load_index(problem, c, t)));
  }
  return value;
}

HeuristicValue solve_aggregated(const LoadBalanceProblem& problem, const lp::SolverOptions& solver)
{
  const std::size_t nt = problem.tasks.size();
  const std::size_t nc = problem.classes.size();
  const std::size_t na = problem.agents.size();

  // Agent groups keyed by (class, free time); task groups keyed by their
  // capacity and trip-time columns.
  std::map<std::pair<std::size_t, double>, std::vector<std::size_t>> agent_groups;
  for (std::size_t j = 0; j < na; ++j)
    agent_groups[{problem.agents[j].class_index, problem.agents[j].free_time}].push_back(j);

  std::map<std::vector<double>, std::vector<std::size_t>> task_groups;
  for (std::size_t t = 0; t < nt; ++t)
  {
    std::vector<double> key;
    key.reserve(2 * nc);
    for (std::size_t c = 0; c < nc; ++c)
    {
      const double cap = problem.classes[c].capacity[t];
      key.push_back(cap);
      key.push_back(cap > 0.0 ? problem.classes[c].trip_time[t] : 0.0);
    }
    task_groups[std::move(key)].push_back(t);
  }

  struct AgentGroup
  {
    std::size_t class_index;
    double free_time;
    std::vector<std::size_t> members;
  };
  struct TaskGroup
  {
    std::size_t representative;
    double effort;
    std::vector<std::size_t> members;
  };
  std::vector<AgentGroup> ag;
  for (auto& [key, members] : agent_groups)
    ag.push_back({key.first, key.second, std::move(members)});
  std::vector<TaskGroup> tg;
  for (auto& [key, members] : task_groups)
  {
    double effort = 0.0;
    for (auto t : members)
      effort += problem.tasks[t].remaining_effort;
    tg.push_back({members.front(), effort, std::move(members)});
  }

  struct Column
  {
    std::size_t agent_group;
    std::size_t task_group;
  };
  std::vector<Column> columns;
  for (std::size_t g = 0; g < ag.size(); ++g)
  {
    for (std::size_t h = 0; h < tg.size(); ++h)
    {
      if (problem.classes[ag[g].class_index].capacity[tg[h].representative] > 0.0)
        columns.push_back({g, h});
    }
  }

  for (std::size_t h = 0; h < tg.size(); ++h)
  {
    const bool covered = std::any_of(
      columns.begin(), columns.end(), [&](const Column& col) { return col.task_group == h; });
    if (!covered)
    {
      throw InfeasibleHeuristic(
        "no agent can serve task " + std::to_string(problem.tasks[tg[h].representative].task_id));
    }
  }

  const auto nvar = static_cast<Eigen::Index>(columns.size() + 1);
  const Eigen::Index s = nvar - 1;
  auto lp = lp::LPStandardFormd::with_variables(nvar);
  lp.objective(s) = 1.0;
  const auto rows = static_cast<Eigen::Index>(tg.size() + ag.size());
  lp.ub_matrix = Eigen::MatrixXd::Zero(rows, nvar);
  lp.ub_rhs = Eigen::VectorXd::Zero(rows);
  for (std::size_t h = 0; h < tg.size(); ++h)
    lp.ub_rhs(static_cast<Eigen::Index>(h)) = -tg[h].effort;
  for (std::size_t g = 0; g < ag.size(); ++g)
  {
    const auto row = static_cast<Eigen::Index>(tg.size() + g);
    lp.ub_matrix(row, s) = -1.0;
    lp.ub_rhs(row) = -ag[g].free_time;
  }
  for (std::size_t k = 0; k < columns.size(); ++k)
  {
    const auto& col = columns[k];
    const auto& terms = problem.classes[ag[col.agent_group].class_index];
    const std::size_t t = tg[col.task_group].representative;
    const auto j = static_cast<Eigen::Index>(k);
    lp.ub_matrix(static_cast<Eigen::Index>(col.task_group), j) = -terms.capacity[t];
    lp.ub_matrix(static_cast<Eigen::Index>(tg.size() + col.agent_group), j) =
      terms.trip_time[t] / static_cast<double>(ag[col.agent_group].members.size());
  }

  const auto result = lp::solve(lp, solver);
  if (result.status != lp::Status::Optimal)
    throw InfeasibleHeuristic(std::string("load balancing LP is ") + lp::to_string(result.status));

  HeuristicValue value;
  value.makespan_bound = result.solution(s);
  value.per_agent_load = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nt));
  value.per_class_load = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nt));
  for (std::size_t k = 0; k < columns.size(); ++k)
  {
    const double total = std::max(0.0, result.solution(static_cast<Eigen::Index>(k)));
    if (total == 0.0)
      continue;
    const auto& group = ag[columns[k].agent_group];
    const auto& tasks = tg[columns[k].task_group];
    const double per_agent = total / static_cast<double>(group.members.size());
    for (auto t : tasks.members)
    {
      const double share = per_agent * problem.tasks[t].remaining_effort / tasks.effort;
      for (auto j : group.members)
        value.per_agent_load(j, t) = share;
      value.per_class_load(group.class_index, t) += share * static_cast<double>(group.members.size());
    }
  }
  return value;
}

} // namespace

//==============================================================================
HeuristicValue estimate_cost_to_go(const LoadBalanceProblem& problem, const HeuristicOptions& options)
{
  problem.validate();
  const double y_max = problem.max_free_time();
  if (problem.tasks.empty())
  {
    HeuristicValue value;
    value.makespan_bound = y_max;
    value.per_agent_load = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(problem.agents.size()), 0);
    value.per_class_load = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(problem.classes.size()), 0);
    return value;
  }

  HeuristicValue value = options.formulation == LpFormulation::Full
    ? solve_full(problem, options.solver)
    : solve_aggregated(problem, options.solver);
  value.makespan_bound = std::max(value.makespan_bound, y_max);
  return value;
}

//==============================================================================
LoadBalanceProblem make_load_balance_problem(
  std::span<const AgentClass> classes,
  std::span<const LoadBalanceProblem::AgentState> agents,
  std::span<const Task> tasks,
  const WorldGeometry& geometry,
  double handling_time,
  TripTimeModel model)
{
  LoadBalanceProblem problem;
  std::vector<const Task*> open;
  for (const auto& t : tasks)
  {
    if (t.remaining_effort > 0.0)
    {
      open.push_back(&t);
      problem.tasks.push_back({t.task_id, t.remaining_effort});
    }
  }
  std::vector<Task> open_tasks;
  open_tasks.reserve(open.size());
  for (const Task* t : open)
    open_tasks.push_back(*t);

  for (const auto& c : classes)
  {
    LoadBalanceProblem::ClassTerms terms;
    terms.class_id = c.class_id;
    terms.capacity.assign(open.size(), 0.0);
    terms.trip_time.assign(open.size(), 0.0);

    // Kind-level bound, computed lazily per kind.
    double kind_bound[3] = {-1.0, -1.0, -1.0};
    for (std::size_t t = 0; t < open.size(); ++t)
    {
      const Task& task = *open[t];
      if (!is_dispatchable(c, task))
        continue;
      terms.capacity[t] = capacity_for(c, task.kind);
      if (model == TripTimeModel::ExactTrip)
      {
        terms.trip_time[t] = trip_duration(c, task, geometry, handling_time);
      }
      else
      {
        double& bound = kind_bound[static_cast<int>(task.kind)];
        if (bound < 0.0)
          bound = trip_time_lower_bound(c, task.kind, open_tasks, geometry, handling_time);
        terms.trip_time[t] = bound;
      }
    }
    problem.classes.push_back(std::move(terms));
  }
  problem.agents.assign(agents.begin(), agents.end());
  return problem;
}

} // namespace rhp
