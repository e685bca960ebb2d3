#pragma once

#include <stdexcept>
#include <string>

namespace rhp {

#define RHP_DEFINE_ERROR(Name)                                   \
  class Name : public std::runtime_error                         \
  {                                                              \
  public:                                                        \
    explicit Name(const std::string& what) : std::runtime_error(what) {} \
  }

RHP_DEFINE_ERROR(NotDispatchable);
RHP_DEFINE_ERROR(DimensionMismatch);
RHP_DEFINE_ERROR(NoFeasibleTerrain);
RHP_DEFINE_ERROR(InfeasibleHeuristic);
RHP_DEFINE_ERROR(NoDispatchablePair);
RHP_DEFINE_ERROR(InfeasibleAction);
RHP_DEFINE_ERROR(ConfigError);
RHP_DEFINE_ERROR(InvariantViolation);

#undef RHP_DEFINE_ERROR

/// Malformed trace or scenario input; `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& what, std::size_t line)
  : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
    _line(line)
  {}

  std::size_t line() const { return _line; }

private:
  std::size_t _line;
};

} // namespace rhp
