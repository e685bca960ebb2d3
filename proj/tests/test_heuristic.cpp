#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include <rhp/heuristic.hpp>

#include <random>

using namespace rhp;

namespace {

LoadBalanceProblem single_class(std::vector<double> free_times, double capacity, double trip, std::vector<double> efforts)
{
  LoadBalanceProblem p;
  LoadBalanceProblem::ClassTerms c;
  c.class_id = "unit";
  for (std::size_t t = 0; t < efforts.size(); ++t)
  {
    p.tasks.push_back({static_cast<TaskId>(t), efforts[t]});
    c.capacity.push_back(capacity);
    c.trip_time.push_back(trip);
  }
  p.classes.push_back(c);
  for (std::size_t j = 0; j < free_times.size(); ++j)
    p.agents.push_back({static_cast<AgentId>(j), 0, free_times[j]});
  return p;
}

LoadBalanceProblem from_snapshot(const WorldSnapshot& snap, TripTimeModel model)
{
  std::vector<LoadBalanceProblem::AgentState> agents;
  for (const auto& a : snap.agents)
  {
    const auto& c = find_class(snap.classes, a.class_id);
    agents.push_back({a.agent_id, static_cast<std::size_t>(&c - snap.classes.data()), std::max(snap.now, a.busy_until)});
  }
  return make_load_balance_problem(snap.classes, agents, snap.tasks, snap.geometry, snap.handling_time, model);
}

double bound(const LoadBalanceProblem& p, LpFormulation f = LpFormulation::Full)
{
  HeuristicOptions o;
  o.formulation = f;
  return estimate_cost_to_go(p, o).makespan_bound;
}

} // namespace

TEST_CASE("trip_time_lower_bound")
{
  WorldGeometry g;
  g.base_position = Point(0, 0);
  AgentClass heli{"h", {5, 4, 0.5, 0.5}};
  std::vector<Task> fires(2);
  fires[0].kind = TaskKind::ExtinguishFire;
  fires[0].location = Point(0, 4);
  fires[0].terrain = Terrain::Forest;
  fires[1] = fires[0];
  fires[1].location = Point(6, 8);
  CHECK(trip_time_lower_bound(heli, TaskKind::ExtinguishFire, fires, g, 0.0) == doctest::Approx(16.0));

  std::vector<Task> at_base(1, fires[0]);
  at_base[0].location = g.base_position;
  CHECK(trip_time_lower_bound(heli, TaskKind::ExtinguishFire, at_base, g, 2.5) == doctest::Approx(2.5));

  AgentClass drone{"d", {0, 0, 0.4, 0.4}};
  CHECK_THROWS_AS(trip_time_lower_bound(drone, TaskKind::ExtinguishFire, fires, g), NoFeasibleTerrain);
  AgentClass agv{"a", {2, 4, 0.2, 0.0}};
  fires[0].terrain = fires[1].terrain = Terrain::City;
  CHECK_THROWS_AS(trip_time_lower_bound(agv, TaskKind::ExtinguishFire, fires, g), NoFeasibleTerrain);
}

TEST_CASE("build_lp shapes")
{
  SUBCASE("minimal instance")
  {
    const auto lp = build_lp(single_class({0.0}, 1.0, 4.0, {2.0}));
    CHECK(lp.variable_count() == 3);
    CHECK(lp.ub_matrix.rows() == 2);
    CHECK(lp.eq_matrix.rows() == 1);
    CHECK(lp.objective == Eigen::Vector3d(0, 0, 1));
  }
  SUBCASE("two tasks, two classes, three agents")
  {
    LoadBalanceProblem p;
    p.tasks = {{0, 1.0}, {1, 2.0}};
    p.classes = {{"a", {1.0, 0.0}, {3.0, 0.0}}, {"b", {2.0, 1.0}, {5.0, 4.0}}};
    p.agents = {{0, 0, 0.0}, {1, 1, 1.0}, {2, 1, 2.0}};
    const auto lp = build_lp(p);
    CHECK(lp.variable_count() == 11);
    CHECK(lp.ub_matrix.rows() == 2 + 3);
    CHECK(lp.eq_matrix.rows() == 2 * 2);

    // Zero-capacity column: class a has no coverage term for task 1 but its
    // balance row still exists and links n_{a,1} to agent 0.
    CHECK(lp.ub_matrix(1, class_load_index(p, 0, 1)) == 0.0);
    const auto row = static_cast<Eigen::Index>(0 * 2 + 1);
    CHECK(lp.eq_matrix(row, class_load_index(p, 0, 1)) == -1.0);
    CHECK(lp.eq_matrix(row, agent_load_index(p, 0, 1)) == 1.0);
    CHECK(lp.eq_matrix(row, agent_load_index(p, 1, 1)) == 0.0);

    // Makespan row of agent 2: y + sum T m <= s.
    CHECK(lp.ub_rhs(2 + 2) == -2.0);
    CHECK(lp.ub_matrix(2 + 2, agent_load_index(p, 2, 1)) == 4.0);
    CHECK(lp.ub_matrix(2 + 2, makespan_index(p)) == -1.0);
  }
}

TEST_CASE("estimate_cost_to_go examples")
{
  for (auto f : {LpFormulation::Full, LpFormulation::Aggregated})
  {
    CAPTURE(static_cast<int>(f));
    HeuristicOptions o;
    o.formulation = f;
    CHECK(estimate_cost_to_go(single_class({3.0, 7.0}, 1.0, 4.0, {}), o).makespan_bound == 7.0);

    const auto one = estimate_cost_to_go(single_class({0.0}, 1.0, 4.0, {2.0}), o);
    CHECK(one.makespan_bound == doctest::Approx(8.0));
    CHECK(one.per_class_load(0, 0) == doctest::Approx(2.0));
    CHECK(one.per_agent_load(0, 0) == doctest::Approx(2.0));

    const auto two = estimate_cost_to_go(single_class({0.0, 0.0}, 1.0, 4.0, {2.0}), o);
    CHECK(two.makespan_bound == doctest::Approx(4.0));
    CHECK(two.per_agent_load(0, 0) == doctest::Approx(1.0));
    CHECK(two.per_agent_load(1, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("unservable task is reported")
{
  for (auto f : {LpFormulation::Full, LpFormulation::Aggregated})
  {
    auto p = single_class({0.0}, 0.0, 0.0, {1.0});
    HeuristicOptions o;
    o.formulation = f;
    CHECK_THROWS_AS(estimate_cost_to_go(p, o), InfeasibleHeuristic);
  }
  auto p = single_class({0.0}, 1.0, 1.0, {0.0});
  CHECK_THROWS_AS(estimate_cost_to_go(p), InfeasibleHeuristic);
}

TEST_CASE("aggregated and full formulations agree")
{
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i)
  {
    auto snap = oracle::random_instance(rng, 5, 6, 4);
    // Duplicate some agents so that groups actually merge.
    const std::size_t n = snap.agents.size();
    for (std::size_t a = 0; a < n; ++a)
    {
      auto copy = snap.agents[a];
      copy.agent_id = static_cast<AgentId>(100 + a);
      snap.agents.push_back(copy);
    }
    for (auto model : {TripTimeModel::KindLowerBound, TripTimeModel::ExactTrip})
    {
      const auto p = from_snapshot(snap, model);
      HeuristicOptions full, agg;
      full.formulation = LpFormulation::Full;
      agg.formulation = LpFormulation::Aggregated;
      const auto a = estimate_cost_to_go(p, full);
      const auto b = estimate_cost_to_go(p, agg);
      CHECK(a.makespan_bound == doctest::Approx(b.makespan_bound).epsilon(1e-9));
      // Split-back loads satisfy the full LP.
      const auto lp = build_lp(p);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(lp.variable_count());
      for (std::size_t t = 0; t < p.tasks.size(); ++t)
      {
        for (std::size_t c = 0; c < p.classes.size(); ++c)
          x(class_load_index(p, c, t)) = b.per_class_load(c, t);
        for (std::size_t j = 0; j < p.agents.size(); ++j)
          x(agent_load_index(p, j, t)) = b.per_agent_load(j, t);
      }
      x(makespan_index(p)) = b.makespan_bound;
      CHECK(lp.max_violation(x) <= 1e-7);
    }
  }
}

TEST_CASE("admissible against exhaustive enumeration")
{
  std::mt19937_64 rng(5);
  int strict = 0;
  for (int i = 0; i < 200; ++i)
  {
    const auto snap = oracle::random_instance(rng);
    const double opt = oracle::optimal_makespan(snap);
    for (auto model : {TripTimeModel::KindLowerBound, TripTimeModel::ExactTrip})
    {
      const double h = bound(from_snapshot(snap, model));
      CHECK(h <= opt + 1e-6);
      if (model == TripTimeModel::ExactTrip && h < opt - 1e-6)
        ++strict;
    }
  }
  CHECK(strict > 0);
}

TEST_CASE("relaxation dominance")
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i)
  {
    const auto snap = oracle::random_instance(rng);
    const auto p = from_snapshot(snap, TripTimeModel::ExactTrip);
    const double base = bound(p);

    auto more_agents = p;
    more_agents.agents.push_back({999, p.agents.front().class_index, 0.0});
    CHECK(bound(more_agents) <= base + 1e-9);

    auto more_work = p;
    more_work.tasks[i % p.tasks.size()].remaining_effort += 1.0 + (i % 3);
    CHECK(bound(more_work) >= base - 1e-9);
  }
}

TEST_CASE("scale equivariance")
{
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i)
  {
    const auto snap = oracle::random_instance(rng);
    const auto p = from_snapshot(snap, TripTimeModel::KindLowerBound);
    const double lambda = 0.25 + 0.5 * (i % 7);
    auto scaled = p;
    for (auto& a : scaled.agents)
      a.free_time *= lambda;
    for (auto& c : scaled.classes)
    {
      for (auto& t : c.trip_time)
        t *= lambda;
    }
    CHECK(bound(scaled) == doctest::Approx(lambda * bound(p)).epsilon(1e-8));
  }
}
