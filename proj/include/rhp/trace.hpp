#pragma once

#include <rhp/domain.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rhp {

using Json = nlohmann::ordered_json;

/// One line of an episode trace. Field order is fixed so that reruns produce
/// byte-identical files.
struct TraceEvent
{
  double time = 0.0;
  std::string event_type;
  std::int64_t subject_id = -1;
  Point position = Point::Zero();
  Json payload = Json::object();
};

std::string to_line(const TraceEvent& event);

/// Throws ParseError carrying `line_number`.
TraceEvent parse_line(std::string_view line, std::size_t line_number);

void write_trace(std::ostream& os, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace(std::istream& is);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace rhp
