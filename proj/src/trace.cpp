#include <rhp/trace.hpp>

#include <istream>
#include <ostream>

namespace rhp {

std::string to_line(const TraceEvent& event)
{
  Json j;
  j["time"] = event.time;
  j["event_type"] = event.event_type;
  j["subject_id"] = event.subject_id;
  j["position"] = {event.position.x(), event.position.y()};
  j["payload"] = event.payload;
  return j.dump();
}

TraceEvent parse_line(std::string_view line, std::size_t line_number)
{
  Json j;
  try
  {
    j = Json::parse(line);
  }
  catch (const Json::parse_error& e)
  {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_number);
  }

  static const char* const fields[] = {"time", "event_type", "subject_id", "position", "payload"};
  if (!j.is_object())
    throw ParseError("event is not an object", line_number);
  for (const char* f : fields)
  {
    if (!j.contains(f))
      throw ParseError(std::string("missing field '") + f + "'", line_number);
  }

  TraceEvent e;
  try
  {
    e.time = j.at("time").get<double>();
    e.event_type = j.at("event_type").get<std::string>();
    e.subject_id = j.at("subject_id").get<std::int64_t>();
    const auto& p = j.at("position");
    if (!p.is_array() || p.size() != 2)
      throw ParseError("position must be a pair", line_number);
    e.position = Point(p[0].get<double>(), p[1].get<double>());
    e.payload = j.at("payload");
  }
  catch (const Json::exception& ex)
  {
    throw ParseError(std::string("bad field type: ") + ex.what(), line_number);
  }
  if (!e.payload.is_object())
    throw ParseError("payload must be an object", line_number);
  return e;
}

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events)
{
  for (const auto& e : events)
    os << to_line(e) << '\n';
}

std::vector<TraceEvent> read_trace(std::istream& is)
{
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line))
  {
    ++n;
    if (line.empty())
      continue;
    events.push_back(parse_line(line, n));
  }
  if (events.empty())
    throw ParseError("trace is empty", 0);
  return events;
}

std::uint64_t fnv1a(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

} // namespace rhp
