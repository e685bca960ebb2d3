#pragma once

#include <rhp/domain.hpp>
#include <rhp/lp_solver.hpp>

#include <Eigen/Core>

#include <span>
#include <vector>

namespace rhp {

//==============================================================================
/// Input of the load-balancing relaxation. Per-class vectors are indexed by
/// task position in `tasks`.
struct LoadBalanceProblem
{
  struct TaskDemand
  {
    TaskId task_id = 0;
    double remaining_effort = 0.0;
  };

  struct ClassTerms
  {
    ClassId class_id;
    std::vector<double> capacity;   // C_c^(t)
    std::vector<double> trip_time;  // T_t^(c)
  };

  struct AgentState
  {
    AgentId agent_id = 0;
    std::size_t class_index = 0;
    double free_time = 0.0;  // y_j
  };

  std::vector<TaskDemand> tasks;
  std::vector<ClassTerms> classes;
  std::vector<AgentState> agents;

  /// Throws InfeasibleHeuristic when the invariants do not hold.
  void validate() const;

  double max_free_time() const;
};

struct HeuristicValue
{
  double makespan_bound = 0.0;
  Eigen::MatrixXd per_agent_load;  // agents x tasks, m_{j,t}
  Eigen::MatrixXd per_class_load;  // classes x tasks, n_{c,t}
};

enum class LpFormulation
{
  /// Exactly the variables and rows emitted by build_lp.
  Full,
  /// Identical agents (same class and free time) and interchangeable tasks
  /// (same capacity and trip-time columns) are merged before solving. The
  /// optimum is the same; loads are split back proportionally.
  Aggregated,
};

enum class TripTimeModel
{
  /// Per class and task kind: nearest reachable target at the fastest
  /// applicable speed.
  KindLowerBound,
  /// The exact round-trip duration of each task.
  ExactTrip,
};

struct HeuristicOptions
{
  LpFormulation formulation = LpFormulation::Aggregated;
  TripTimeModel trip_times = TripTimeModel::KindLowerBound;
  lp::SolverOptions solver;
};

//==============================================================================
/// 2 * d_min / v_max + handling over the targets of `kind` this class can
/// serve. Throws NoFeasibleTerrain when it can serve none of them.
double trip_time_lower_bound(
  const AgentClass& agent_class,
  TaskKind kind,
  std::span<const Task> targets,
  const WorldGeometry& geometry,
  double handling_time = kDefaultHandlingTime);

/// Variables are laid out as [n_{c,t} (class-major) | m_{j,t} (agent-major) | s].
/// Coverage and makespan rows are inequalities, class balance rows are
/// equalities.
lp::LPStandardFormd build_lp(const LoadBalanceProblem& problem);

inline Eigen::Index class_load_index(const LoadBalanceProblem& p, std::size_t c, std::size_t t)
{
  return static_cast<Eigen::Index>(c * p.tasks.size() + t);
}

inline Eigen::Index agent_load_index(const LoadBalanceProblem& p, std::size_t j, std::size_t t)
{
  return static_cast<Eigen::Index>((p.classes.size() + j) * p.tasks.size() + t);
}

inline Eigen::Index makespan_index(const LoadBalanceProblem& p)
{
  return static_cast<Eigen::Index>((p.classes.size() + p.agents.size()) * p.tasks.size());
}

/// Lower bound on the makespan of any integral completion. Throws
/// InfeasibleHeuristic when some task cannot be covered by any class.
HeuristicValue estimate_cost_to_go(
  const LoadBalanceProblem& problem, const HeuristicOptions& options = {});

/// Builds the relaxation for a set of agents and their remaining tasks. Tasks
/// with no remaining effort are skipped; non-dispatchable pairs get zero
/// capacity.
LoadBalanceProblem make_load_balance_problem(
  std::span<const AgentClass> classes,
  std::span<const LoadBalanceProblem::AgentState> agents,
  std::span<const Task> tasks,
  const WorldGeometry& geometry,
  double handling_time,
  TripTimeModel model);

} // namespace rhp
