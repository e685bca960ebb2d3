#pragma once

// Brute-force references used only by tests. Nothing here calls into the
// planner, the heuristic or the simplex code.

#include <rhp/domain.hpp>
#include <rhp/lp_solver.hpp>
#include <rhp/planner.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

//==============================================================================
struct VertexResult
{
  rhp::lp::Status status = rhp::lp::Status::Infeasible;
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;
};

namespace detail {

inline VertexResult enumerate_boxed(const rhp::lp::LPStandardFormd& lp, double box)
{
  const Eigen::Index n = lp.variable_count();
  const Eigen::Index e = lp.eq_matrix.rows();

  // Inequalities G x <= h: user rows, nonnegativity and sum(x) <= box.
  const Eigen::Index m_ub = lp.ub_matrix.rows();
  Eigen::MatrixXd G(m_ub + n + 1, n);
  Eigen::VectorXd h(m_ub + n + 1);
  if (m_ub)
  {
    G.topRows(m_ub) = lp.ub_matrix;
    h.head(m_ub) = lp.ub_rhs;
  }
  G.middleRows(m_ub, n) = -Eigen::MatrixXd::Identity(n, n);
  h.segment(m_ub, n).setZero();
  G.row(m_ub + n).setOnes();
  h(m_ub + n) = box;

  VertexResult best;
  const Eigen::Index need = n - e;
  if (need < 0)
    return best;

  std::vector<Eigen::Index> chosen;
  std::function<void(Eigen::Index)> recurse = [&](Eigen::Index from) {
    if (static_cast<Eigen::Index>(chosen.size()) == need)
    {
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd b(n);
      if (e)
      {
        A.topRows(e) = lp.eq_matrix;
        b.head(e) = lp.eq_rhs;
      }
      for (Eigen::Index k = 0; k < need; ++k)
      {
        A.row(e + k) = G.row(chosen[k]);
        b(e + k) = h(chosen[k]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < n)
        return;
      const Eigen::VectorXd x = lu.solve(b);
      if ((G * x - h).maxCoeff() > 1e-9)
        return;
      if (e && (lp.eq_matrix * x - lp.eq_rhs).cwiseAbs().maxCoeff() > 1e-9)
        return;
      const double obj = lp.objective.dot(x);
      if (best.status != rhp::lp::Status::Optimal || obj < best.objective)
      {
        best.status = rhp::lp::Status::Optimal;
        best.objective = obj;
        best.point = x;
      }
      return;
    }
    for (Eigen::Index i = from; i < G.rows(); ++i)
    {
      chosen.push_back(i);
      recurse(i + 1);
      chosen.pop_back();
    }
  };
  recurse(0);
  return best;
}

} // namespace detail

/// Exhaustive vertex enumeration for small LPs with x >= 0. Unboundedness is
/// detected by growing a bounding simplex and watching the optimum move.
inline VertexResult vertex_enumeration(const rhp::lp::LPStandardFormd& input)
{
  // Dependent equality rows would make every vertex system singular: keep an
  // independent subset, and report infeasible if a dropped row disagrees.
  rhp::lp::LPStandardFormd lp = input;
  const Eigen::Index n = input.variable_count();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < input.eq_matrix.rows(); ++i)
  {
    Eigen::MatrixXd rows(keep.size() + 1, n);
    Eigen::MatrixXd augmented(keep.size() + 1, n + 1);
    for (std::size_t k = 0; k <= keep.size(); ++k)
    {
      const Eigen::Index r = k < keep.size() ? keep[k] : i;
      rows.row(k) = input.eq_matrix.row(r);
      augmented.row(k) << input.eq_matrix.row(r), input.eq_rhs(r);
    }
    const auto rank = Eigen::FullPivLU<Eigen::MatrixXd>(rows).setThreshold(1e-10).rank();
    const auto rank_aug = Eigen::FullPivLU<Eigen::MatrixXd>(augmented).setThreshold(1e-10).rank();
    if (rank == static_cast<Eigen::Index>(keep.size() + 1))
      keep.push_back(i);
    else if (rank_aug > rank)
      return {};
  }
  lp.eq_matrix.resize(static_cast<Eigen::Index>(keep.size()), n);
  lp.eq_rhs.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
  {
    lp.eq_matrix.row(k) = input.eq_matrix.row(keep[k]);
    lp.eq_rhs(k) = input.eq_rhs(keep[k]);
  }

  const double box = 1e4;
  auto small = detail::enumerate_boxed(lp, box);
  if (small.status != rhp::lp::Status::Optimal)
    return small;
  const auto large = detail::enumerate_boxed(lp, 2.0 * box);
  if (large.objective < small.objective - 1e-6)
  {
    VertexResult r;
    r.status = rhp::lp::Status::Unbounded;
    r.objective = -std::numeric_limits<double>::infinity();
    return r;
  }
  return small;
}

//==============================================================================
/// Optimal makespan over every integral trip allocation. Trips by one agent
/// run back to back from its free time; all release times must be zero.
inline double optimal_makespan(const rhp::WorldSnapshot& snap)
{
  const std::size_t na = snap.agents.size();
  std::vector<double> free(na);
  std::vector<const rhp::AgentClass*> cls(na);
  for (std::size_t a = 0; a < na; ++a)
  {
    free[a] = std::max(snap.now, snap.agents[a].busy_until);
    cls[a] = &rhp::find_class(snap.classes, snap.agents[a].class_id);
  }

  struct TaskCovers
  {
    std::vector<double> duration;                // per agent
    std::vector<std::vector<int>> allocations;   // minimal covers
  };
  std::vector<TaskCovers> tasks;
  for (const auto& task : snap.tasks)
  {
    if (!(task.remaining_effort > 1e-9))
      continue;
    TaskCovers tc;
    std::vector<double> cap(na, 0.0);
    std::vector<int> max_trips(na, 0);
    tc.duration.assign(na, 0.0);
    for (std::size_t a = 0; a < na; ++a)
    {
      if (!rhp::is_dispatchable(*cls[a], task))
        continue;
      cap[a] = rhp::capacity_for(*cls[a], task.kind);
      const auto& k = cls[a]->capabilities;
      tc.duration[a] = 2.0 * (task.location - snap.geometry.base_position).norm()
                         / k.speed_in(task.terrain)
                     + snap.handling_time;
      max_trips[a] = static_cast<int>(std::ceil(task.remaining_effort / cap[a] - 1e-9));
    }
    std::vector<int> k(na, 0);
    const auto covers = [&](const std::vector<int>& v) {
      double total = 0.0;
      for (std::size_t a = 0; a < na; ++a)
        total += cap[a] * v[a];
      return total >= task.remaining_effort - 1e-9;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t a) {
      if (a == na)
      {
        if (!covers(k))
          return;
        for (std::size_t b = 0; b < na; ++b)
        {
          if (k[b] == 0)
            continue;
          --k[b];
          const bool still = covers(k);
          ++k[b];
          if (still)
            return;
        }
        tc.allocations.push_back(k);
        return;
      }
      for (int v = 0; v <= max_trips[a]; ++v)
      {
        k[a] = v;
        rec(a + 1);
      }
      k[a] = 0;
    };
    rec(0);
    if (tc.allocations.empty())
      return std::numeric_limits<double>::infinity();
    tasks.push_back(std::move(tc));
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> load = free;
  std::function<void(std::size_t)> combine = [&](std::size_t t) {
    if (t == tasks.size())
    {
      best = std::min(best, *std::max_element(load.begin(), load.end()));
      return;
    }
    for (const auto& alloc : tasks[t].allocations)
    {
      for (std::size_t a = 0; a < na; ++a)
        load[a] += alloc[a] * tasks[t].duration[a];
      combine(t + 1);
      for (std::size_t a = 0; a < na; ++a)
        load[a] -= alloc[a] * tasks[t].duration[a];
    }
  };
  if (na == 0)
    return tasks.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  combine(0);
  return best;
}

//==============================================================================
/// Small heterogeneous instances: up to `max_agents` agents of random classes
/// with integer capacities, up to `max_tasks` tasks with integer efforts up
/// to `max_effort`. Every task is servable by at least one agent.
inline rhp::WorldSnapshot random_instance(
  std::mt19937_64& rng,
  std::size_t max_agents = 3,
  std::size_t max_tasks = 4,
  int max_effort = 3)
{
  std::uniform_int_distribution<int> small(0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double speeds[] = {0.0, 0.1, 0.2, 0.4, 0.5};
  std::uniform_int_distribution<int> speed_pick(0, 4);

  rhp::WorldSnapshot snap;
  snap.handling_time = std::uniform_int_distribution<int>(0, 2)(rng) * 0.5;

  const std::size_t nc = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  for (std::size_t c = 0; c < nc; ++c)
  {
    rhp::AgentClass k;
    k.class_id = "class" + std::to_string(c);
    k.capabilities.water_capacity = small(rng);
    k.capabilities.rescue_capacity = small(rng);
    k.capabilities.speed_forest = speeds[speed_pick(rng)];
    k.capabilities.speed_city = speeds[speed_pick(rng)];
    if (k.capabilities.max_speed() == 0.0)
      k.capabilities.speed_city = 0.4;
    snap.classes.push_back(k);
  }

  const std::size_t na = std::uniform_int_distribution<std::size_t>(1, max_agents)(rng);
  for (std::size_t a = 0; a < na; ++a)
  {
    rhp::Agent agent;
    agent.agent_id = static_cast<rhp::AgentId>(a);
    agent.class_id = snap.classes[std::uniform_int_distribution<std::size_t>(0, nc - 1)(rng)].class_id;
    agent.position = snap.geometry.base_position;
    agent.busy_until = unit(rng) < 0.5 ? 0.0 : std::floor(10.0 * unit(rng));
    snap.agents.push_back(agent);
  }

  const std::size_t nt = std::uniform_int_distribution<std::size_t>(1, max_tasks)(rng);
  const rhp::TaskKind kinds[] = {
    rhp::TaskKind::ExtinguishFire, rhp::TaskKind::RescueVictim, rhp::TaskKind::Explore};
  while (snap.tasks.size() < nt)
  {
    rhp::Task task;
    task.task_id = static_cast<rhp::TaskId>(snap.tasks.size());
    task.kind = kinds[std::uniform_int_distribution<int>(0, 2)(rng)];
    task.location = rhp::Point(2.0 + 17.0 * unit(rng), 2.0 + 17.0 * unit(rng));
    task.terrain = snap.geometry.terrain_at(task.location);
    task.required_effort = std::uniform_int_distribution<int>(1, max_effort)(rng);
    task.remaining_effort = task.required_effort;
    const bool servable = std::any_of(snap.agents.begin(), snap.agents.end(), [&](const rhp::Agent& a) {
      return rhp::is_dispatchable(rhp::find_class(snap.classes, a.class_id), task);
    });
    if (servable)
      snap.tasks.push_back(task);
  }
  return snap;
}

//==============================================================================
/// Small integer LPs: up to six variables and six rows, roughly one in five
/// carrying equality rows.
inline rhp::lp::LPStandardFormd random_lp(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> nvar(1, 6);
  std::uniform_int_distribution<int> ncon(1, 6);
  std::uniform_int_distribution<int> coef(-5, 5);
  const int n = nvar(rng);
  const int m_eq = std::uniform_int_distribution<int>(0, 4)(rng) == 0 ? std::min(n, 2) : 0;
  const int m = std::min(ncon(rng), 6 - m_eq);  // at most six rows in total
  auto lp = rhp::lp::LPStandardFormd::with_variables(n);
  for (int j = 0; j < n; ++j)
    lp.objective(j) = coef(rng);

  lp.ub_matrix = Eigen::MatrixXd::Zero(m, n);
  lp.ub_rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
  {
    for (int j = 0; j < n; ++j)
      lp.ub_matrix(i, j) = coef(rng);
    lp.ub_rhs(i) = std::uniform_int_distribution<int>(-3, 10)(rng);
  }
  lp.eq_matrix = Eigen::MatrixXd::Zero(m_eq, n);
  lp.eq_rhs = Eigen::VectorXd::Zero(m_eq);
  for (int i = 0; i < m_eq; ++i)
  {
    for (int j = 0; j < n; ++j)
      lp.eq_matrix(i, j) = std::uniform_int_distribution<int>(0, 3)(rng);
    lp.eq_rhs(i) = std::uniform_int_distribution<int>(0, 6)(rng);
  }
  return lp;
}

/// Completion time of a schedule replayed from the snapshot's free times.
inline double schedule_makespan(const rhp::WorldSnapshot& snap, const std::vector<rhp::Assignment>& schedule)
{
  double makespan = snap.now;
  for (const auto& a : snap.agents)
    makespan = std::max(makespan, a.busy_until);
  for (const auto& a : schedule)
    makespan = std::max(makespan, a.end_time());
  return makespan;
}

} // namespace oracle
