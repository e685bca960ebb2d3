#include <rhp/bench.hpp>

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace rhp {

//==============================================================================
// Scenario files
namespace {

std::size_t line_of(const YAML::Node& node)
{
  return node.Mark().line >= 0 ? static_cast<std::size_t>(node.Mark().line) + 1 : 0;
}

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed, const std::string& where)
{
  if (!node.IsMap())
    throw ParseError(where + " must be a mapping", line_of(node));
  for (const auto& kv : node)
  {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where + " (line " + std::to_string(line_of(kv.first)) + ")");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out)
{
  const auto value = node[key];
  if (!value)
    return;
  try
  {
    out = value.as<T>();
  }
  catch (const YAML::Exception&)
  {
    throw ParseError(std::string("bad value for '") + key + "'", line_of(value));
  }
}

void read_point(const YAML::Node& node, const char* key, Point& out)
{
  const auto value = node[key];
  if (!value)
    return;
  if (!value.IsSequence() || value.size() != 2)
    throw ParseError(std::string("'") + key + "' must be a pair [x, y]", line_of(value));
  try
  {
    out = Point(value[0].as<double>(), value[1].as<double>());
  }
  catch (const YAML::Exception&)
  {
    throw ParseError(std::string("bad coordinates for '") + key + "'", line_of(value));
  }
}

void read_rect(const YAML::Node& node, const char* key, Rect& out, const std::string& where)
{
  const auto value = node[key];
  if (!value)
    return;
  check_keys(value, {"min", "max"}, where + "." + key);
  read_point(value, "min", out.min);
  read_point(value, "max", out.max);
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(text);
  }
  catch (const YAML::ParserException& e)
  {
    throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line) + 1);
  }
  if (!root || root.IsNull())
    throw ParseError("scenario is empty", 0);

  check_keys(root, {"geometry", "classes", "fleet", "victim_count", "initial_fire_count", "fire", "simulator"},
             "scenario");
  ScenarioConfig s;

  if (const auto g = root["geometry"])
  {
    check_keys(g, {"width", "height", "base", "hospital", "city_region", "forest_region", "cell_size"}, "geometry");
    read(g, "width", s.geometry.width);
    read(g, "height", s.geometry.height);
    read_point(g, "base", s.geometry.base_position);
    read_point(g, "hospital", s.geometry.hospital_position);
    read_rect(g, "city_region", s.geometry.city_region, "geometry");
    read_rect(g, "forest_region", s.geometry.forest_region, "geometry");
    read(g, "cell_size", s.geometry.cell_size);
  }

  if (const auto classes = root["classes"])
  {
    if (!classes.IsSequence())
      throw ParseError("classes must be a list", line_of(classes));
    s.classes.clear();
    for (const auto& c : classes)
    {
      check_keys(c, {"id", "water_capacity", "rescue_capacity", "speed_forest", "speed_city"}, "classes");
      AgentClass k;
      read(c, "id", k.class_id);
      if (k.class_id.empty())
        throw ConfigError("class without an id (line " + std::to_string(line_of(c)) + ")");
      read(c, "water_capacity", k.capabilities.water_capacity);
      read(c, "rescue_capacity", k.capabilities.rescue_capacity);
      read(c, "speed_forest", k.capabilities.speed_forest);
      read(c, "speed_city", k.capabilities.speed_city);
      s.classes.push_back(k);
    }
  }

  if (const auto fleet = root["fleet"])
  {
    if (!fleet.IsMap())
      throw ParseError("fleet must map class ids to counts", line_of(fleet));
    for (const auto& kv : fleet)
    {
      FleetEntry e;
      e.class_id = kv.first.as<std::string>();
      try
      {
        e.count = kv.second.as<int>();
      }
      catch (const YAML::Exception&)
      {
        throw ParseError("bad fleet count for '" + e.class_id + "'", line_of(kv.second));
      }
      s.fleet.push_back(e);
    }
  }

  read(root, "victim_count", s.victim_count);
  read(root, "initial_fire_count", s.initial_fire_count);

  if (const auto f = root["fire"])
  {
    check_keys(f, {"initial_health", "growth_rate", "water_per_health", "spread_radius", "child_initial_health", "max_fires"},
               "fire");
    read(f, "initial_health", s.fire.initial_health);
    read(f, "growth_rate", s.fire.growth_rate);
    read(f, "water_per_health", s.fire.water_per_health);
    read(f, "spread_radius", s.fire.spread_radius);
    read(f, "child_initial_health", s.fire.child_initial_health);
    read(f, "max_fires", s.fire.max_fires);
  }

  if (const auto k = root["simulator"])
  {
    check_keys(k, {"dt", "time_limit", "sensing_radius", "handling_time", "pre_explored"}, "simulator");
    read(k, "dt", s.simulator.dt);
    read(k, "time_limit", s.simulator.time_limit);
    read(k, "sensing_radius", s.simulator.sensing_radius);
    read(k, "handling_time", s.simulator.handling_time);
    read(k, "pre_explored", s.simulator.pre_explored);
  }

  s.validate();
  return s;
}

ScenarioConfig load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

//==============================================================================
// Planner specs
PlannerSpec PlannerSpec::parse(const std::string& text)
{
  PlannerSpec spec;
  if (text == "greedy")
    return spec;
  spec.kind = Kind::RecedingHorizon;
  if (text == "rhp")
    return spec;
  if (text.rfind("rhp:", 0) == 0)
  {
    const std::string digits = text.substr(4);
    std::size_t depth = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), depth);
    if (ec == std::errc() && end == digits.data() + digits.size() && depth > 0)
    {
      spec.depth = depth;
      return spec;
    }
  }
  throw ConfigError("unknown planner '" + text + "' (expected greedy, rhp or rhp:<depth>)");
}

PlannerConfig PlannerSpec::planner_config() const
{
  auto config = PlannerConfig::with_depth(depth);
  if (commit)
    config.commit_count = *commit;
  config.node_budget = node_budget;
  config.replan_interval = replan_interval;
  config.validate();
  return config;
}

std::string PlannerSpec::label() const
{
  return kind == Kind::Greedy ? "greedy" : "rhp" + std::to_string(depth);
}

std::unique_ptr<Planner> PlannerSpec::make() const
{
  if (kind == Kind::Greedy)
    return std::make_unique<GreedyPlanner>(replan_interval);
  return std::make_unique<RecedingHorizonPlanner>(planner_config());
}

//==============================================================================
// Trials and statistics
Summary summarize(std::vector<double> values)
{
  Summary s;
  if (values.empty())
    return s;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  if (n > 1)
  {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

std::vector<double> TrialStats::makespans() const
{
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials)
    out.push_back(t.makespan);
  return out;
}

TrialStats TrialStats::from_trials(std::string planner, std::vector<TrialRecord> trials)
{
  TrialStats stats;
  stats.planner = std::move(planner);
  std::sort(trials.begin(), trials.end(), [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
  stats.trials = std::move(trials);
  stats.makespan = summarize(stats.makespans());
  double fires = 0.0;
  for (const auto& t : stats.trials)
  {
    stats.completed += t.completed;
    fires += t.fires_spawned;
  }
  if (!stats.trials.empty())
    stats.mean_fires_spawned = fires / static_cast<double>(stats.trials.size());
  return stats;
}

TrialStats run_trials(
  const ScenarioConfig& scenario,
  const PlannerSpec& spec,
  std::size_t trial_count,
  std::uint64_t base_seed,
  const TrialSink& sink)
{
  if (trial_count < 1)
    throw ConfigError("trial count must be at least 1");
  scenario.validate();
  std::vector<TrialRecord> records;
  for (std::size_t i = 0; i < trial_count; ++i)
  {
    const std::uint64_t seed = base_seed + i;
    auto planner = spec.make();
    const auto episode = run_episode(scenario, *planner, seed);
    TrialRecord r;
    r.planner = spec.label();
    r.seed = seed;
    r.makespan = episode.makespan;
    r.fires_spawned = episode.fires_spawned;
    r.victims_rescued = episode.victims_rescued;
    r.completed = episode.completed;
    r.replans = episode.replans;
    r.nodes_expanded = episode.nodes_expanded;
    if (sink)
      sink(r, episode);
    records.push_back(r);
  }
  return TrialStats::from_trials(spec.label(), std::move(records));
}

std::vector<TrialStats> compare(
  const ScenarioConfig& scenario,
  const std::vector<PlannerSpec>& specs,
  std::size_t trial_count,
  std::uint64_t base_seed,
  const TrialSink& sink)
{
  if (specs.size() < 2)
    throw ConfigError("compare needs at least two planners");
  std::vector<TrialStats> out;
  for (const auto& spec : specs)
    out.push_back(run_trials(scenario, spec, trial_count, base_seed, sink));
  return out;
}

//==============================================================================
// Reports
const std::vector<ReferenceRow>& reference_makespans()
{
  static const std::vector<ReferenceRow> rows = {
    {"Greedy", 78.78, 53.03, 10.63},
    {"RHP10", 42.54, 40.34, 9.54},
    {"RHP15", 40.09, 38.56, 7.95},
    {"RHP20", 39.87, 36.84, 9.39},
  };
  return rows;
}

std::string format_number(double value)
{
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

std::string format_report(const std::vector<TrialStats>& stats, std::uint64_t base_seed)
{
  std::ostringstream os;
  const std::size_t n = stats.empty() ? 0 : stats.front().trials.size();
  os << "Makespan over " << n << " paired trials (seeds " << base_seed << ".." << base_seed + (n ? n - 1 : 0)
     << ")\n";
  os << "sigma: sample standard deviation, n - 1 denominator (0 for a single trial)\n\n";
  os << std::left << std::setw(10) << "planner" << std::right << std::setw(10) << "mean" << std::setw(10) << "median"
     << std::setw(10) << "sigma" << std::setw(12) << "completed" << std::setw(14) << "fires_spawned" << '\n';
  os << std::fixed << std::setprecision(2);
  for (const auto& s : stats)
  {
    std::ostringstream done;
    done << s.completed << "/" << s.trials.size();
    os << std::left << std::setw(10) << s.planner << std::right << std::setw(10) << s.makespan.mean << std::setw(10)
       << s.makespan.median << std::setw(10) << s.makespan.stddev << std::setw(12) << done.str() << std::setw(14)
       << s.mean_fires_spawned << '\n';
  }

  if (stats.size() >= 2 && stats.front().makespan.mean > 0.0)
  {
    os << "\nmean ratio to " << stats.front().planner << ":\n";
    for (std::size_t i = 1; i < stats.size(); ++i)
    {
      os << "  " << std::left << std::setw(8) << stats[i].planner << std::right << std::setprecision(3)
         << stats[i].makespan.mean / stats.front().makespan.mean << '\n';
    }
    os << std::setprecision(2);
  }

  os << "\nReference (paper-reported, different simulator constants)\n";
  os << std::left << std::setw(10) << "planner" << std::right << std::setw(10) << "mean" << std::setw(10) << "median"
     << std::setw(10) << "sigma" << '\n';
  for (const auto& r : reference_makespans())
  {
    os << std::left << std::setw(10) << r.planner << std::right << std::setw(10) << r.mean << std::setw(10) << r.median
       << std::setw(10) << r.stddev << '\n';
  }
  return os.str();
}

void write_results_csv(std::ostream& os, const std::vector<TrialStats>& stats)
{
  os << "planner,seed,makespan,fires_spawned,victims_rescued,completed\n";
  for (const auto& s : stats)
  {
    for (const auto& t : s.trials)
    {
      os << t.planner << ',' << t.seed << ',' << format_number(t.makespan) << ',' << t.fires_spawned << ','
         << t.victims_rescued << ',' << (t.completed ? "true" : "false") << '\n';
    }
  }
}

namespace {

double quantile(const std::vector<double>& sorted, double q)
{
  if (sorted.empty())
    return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

std::string box_plot_svg(const std::vector<TrialStats>& stats)
{
  const double width = 120.0 * static_cast<double>(std::max<std::size_t>(stats.size(), 1)) + 80.0;
  const double height = 360.0;
  const double top = 30.0, bottom = 320.0, left = 60.0;
  double vmax = 1.0;
  for (const auto& s : stats)
  {
    for (double m : s.makespans())
      vmax = std::max(vmax, m);
  }
  vmax *= 1.05;
  const auto y = [&](double v) { return bottom - (bottom - top) * v / vmax; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k)
  {
    const double v = vmax * k / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << v
       << "</text>\n";
  }
  for (std::size_t i = 0; i < stats.size(); ++i)
  {
    auto values = stats[i].makespans();
    std::sort(values.begin(), values.end());
    const double cx = left + 60.0 + 120.0 * static_cast<double>(i);
    const double q1 = quantile(values, 0.25), q2 = quantile(values, 0.5), q3 = quantile(values, 0.75);
    const double lo = values.empty() ? 0.0 : values.front(), hi = values.empty() ? 0.0 : values.back();
    os << "<line x1=\"" << cx << "\" y1=\"" << y(lo) << "\" x2=\"" << cx << "\" y2=\"" << y(hi)
       << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << cx - 30 << "\" y=\"" << y(q3) << "\" width=\"60\" height=\"" << y(q1) - y(q3)
       << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << cx - 30 << "\" y1=\"" << y(q2) << "\" x2=\"" << cx + 30 << "\" y2=\"" << y(q2)
       << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << cx << "\" y=\"" << bottom + 20 << "\" font-size=\"12\" text-anchor=\"middle\">"
       << stats[i].planner << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

//==============================================================================
// Replay
namespace {

bool is_agent_event(const std::string& type)
{
  static const std::set<std::string> types = {"dispatch", "arrive", "load_water", "deliver_water",
                                              "pickup", "drop", "explore"};
  return types.count(type) > 0;
}

struct AgentTrack
{
  double max_speed = 0.0;
  double time = 0.0;
  Point position = Point::Zero();
  double water = 0.0;
  std::set<int> carried;
};

} // namespace

ReplaySummary replay_events(const std::vector<TraceEvent>& events)
{
  ReplaySummary r;
  r.events = events.size();
  auto fail = [&](const std::string& check, const std::string& what, const TraceEvent& e) {
    r.violations.push_back(check + ": " + what + " (t=" + format_number(e.time) + ", " + e.event_type + " "
                           + std::to_string(e.subject_id) + ")");
  };

  if (events.empty() || events.front().event_type != "episode_start")
  {
    r.violations.push_back("ordering: trace does not begin with episode_start");
    return r;
  }
  if (events.back().event_type != "episode_end")
  {
    r.violations.push_back("ordering: trace does not end with episode_end");
    return r;
  }

  const auto& start = events.front().payload;
  int cell_count = 0;
  int victim_count = 0;
  double time_limit = 0.0;
  Point hospital = Point::Zero();
  try
  {
    r.seed = start.at("seed").get<std::uint64_t>();
    r.planner = start.at("planner").get<std::string>();
    cell_count = start.at("cell_count").get<int>();
    victim_count = start.at("victim_count").get<int>();
    time_limit = start.at("time_limit").get<double>();
    hospital = Point(start.at("hospital")[0].get<double>(), start.at("hospital")[1].get<double>());
  }
  catch (const Json::exception&)
  {
    r.violations.push_back("ordering: episode_start is missing required fields");
    return r;
  }

  std::map<std::int64_t, AgentTrack> agents;
  std::map<std::int64_t, double> fire_water;  // applied deliveries per active fire
  std::set<std::int64_t> fires_active;
  std::set<std::int64_t> fires_extinguished;
  std::set<std::int64_t> explored;
  std::set<int> identified, picked, rescued;
  double last_time = 0.0;
  double completion_time = 0.0;

  for (std::size_t i = 0; i < events.size(); ++i)
  {
    const auto& e = events[i];
    const auto& p = e.payload;
    if (e.time < last_time - 1e-12)
      fail("ordering", "timestamp decreases", e);
    last_time = std::max(last_time, e.time);
    if (i > 0 && e.event_type == "episode_start")
      fail("ordering", "second episode_start", e);

    try
    {
      if (e.event_type == "agent_spawn")
      {
        AgentTrack t;
        t.max_speed = p.at("max_speed").get<double>();
        t.time = e.time;
        t.position = e.position;
        agents[e.subject_id] = t;
        continue;
      }

      if (is_agent_event(e.event_type))
      {
        auto it = agents.find(e.subject_id);
        if (it == agents.end())
        {
          fail("motion", "event for an agent that was never spawned", e);
          continue;
        }
        AgentTrack& a = it->second;
        const double moved = (e.position - a.position).norm();
        const double allowed = a.max_speed * (e.time - a.time) + 1e-9;
        if (moved > allowed)
          fail("no teleportation", "moved " + format_number(moved) + " but at most " + format_number(allowed), e);
        a.time = e.time;
        a.position = e.position;

        if (e.event_type == "load_water")
          a.water += p.at("amount").get<double>();
        else if (e.event_type == "deliver_water")
        {
          const double amount = p.at("amount").get<double>();
          if (std::abs(amount - a.water) > 1e-9)
            fail("water conservation", "delivered " + format_number(amount) + " while carrying " + format_number(a.water), e);
          a.water = 0.0;
          const auto fire = p.at("fire_id").get<std::int64_t>();
          if (p.at("applied").get<bool>())
          {
            if (!fires_active.count(fire))
              fail("water conservation", "water applied to an inactive fire", e);
            fire_water[fire] += amount;
          }
        }
        else if (e.event_type == "pickup")
        {
          for (const auto& v : p.at("victims"))
          {
            const int id = v.get<int>();
            if (!identified.count(id))
              fail("victim conservation", "picked up unidentified victim " + std::to_string(id), e);
            if (!picked.insert(id).second)
              fail("victim conservation", "victim " + std::to_string(id) + " picked up twice", e);
            a.carried.insert(id);
          }
        }
        else if (e.event_type == "drop")
        {
          if (!p.at("victims").empty() && (e.position - hospital).norm() > 1e-9)
            fail("victim conservation", "drop away from the hospital", e);
          for (const auto& v : p.at("victims"))
          {
            const int id = v.get<int>();
            if (!a.carried.erase(id))
              fail("victim conservation", "dropped victim " + std::to_string(id) + " that was not carried", e);
            if (!rescued.insert(id).second)
              fail("victim conservation", "victim " + std::to_string(id) + " rescued twice", e);
            completion_time = std::max(completion_time, e.time);
          }
        }
        continue;
      }

      if (e.event_type == "fire_spawned")
      {
        if (!fires_active.insert(e.subject_id).second || fires_extinguished.count(e.subject_id))
          fail("water conservation", "fire id reused", e);
        if (!p.at("parent").is_null())
          ++r.fires_spawned;
      }
      else if (e.event_type == "fire_extinguished")
      {
        if (!fires_active.erase(e.subject_id))
          fail("water conservation", "extinguished a fire that was not burning", e);
        fires_extinguished.insert(e.subject_id);
        const double accrued = p.at("accrued_water").get<double>();
        const double received = fire_water[e.subject_id];
        if (received < accrued - 1e-9)
          fail("water conservation",
               "fire received " + format_number(received) + " of " + format_number(accrued) + " accrued water", e);
        completion_time = std::max(completion_time, e.time);
      }
      else if (e.event_type == "cell_explored")
      {
        if (!explored.insert(e.subject_id).second)
          fail("exploration", "cell explored twice", e);
        completion_time = std::max(completion_time, e.time);
      }
      else if (e.event_type == "victim_identified")
      {
        if (!identified.insert(static_cast<int>(e.subject_id)).second)
          fail("victim conservation", "victim identified twice", e);
      }
    }
    catch (const Json::exception& ex)
    {
      fail("format", std::string("malformed payload: ") + ex.what(), e);
    }
  }

  r.victims_rescued = static_cast<int>(rescued.size());
  if (r.victims_rescued > victim_count)
    r.violations.push_back("victim conservation: more victims rescued than exist");
  r.completed = fires_active.empty() && static_cast<int>(explored.size()) == cell_count && r.victims_rescued == victim_count;
  r.makespan = r.completed ? completion_time : time_limit;

  const auto& end = events.back();
  try
  {
    const auto& q = end.payload;
    if (q.at("makespan").get<double>() != r.makespan)
      fail("aggregates", "makespan " + format_number(q.at("makespan").get<double>()) + " != recomputed " + format_number(r.makespan), end);
    if (q.at("fires_spawned").get<int>() != r.fires_spawned)
      fail("aggregates", "fires_spawned mismatch", end);
    if (q.at("victims_rescued").get<int>() != r.victims_rescued)
      fail("aggregates", "victims_rescued mismatch", end);
    if (q.at("completed").get<bool>() != r.completed)
      fail("aggregates", "completed flag mismatch", end);
  }
  catch (const Json::exception&)
  {
    fail("aggregates", "episode_end is missing required fields", end);
  }
  return r;
}

ReplaySummary replay(std::istream& is)
{
  const auto events = read_trace(is);
  auto summary = replay_events(events);
  if (!summary.violations.empty())
    throw InvariantViolation(summary.violations.front());
  return summary;
}

} // namespace rhp
