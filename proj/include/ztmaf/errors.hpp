#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ztmaf {

/// Base for every failure the library reports by exception.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define ZTMAF_DEFINE_ERROR(Name)        \
  class Name : public Error             \
  {                                     \
  public:                               \
    using Error::Error;                 \
  }

ZTMAF_DEFINE_ERROR(InvalidPosition);
ZTMAF_DEFINE_ERROR(UnknownNode);
ZTMAF_DEFINE_ERROR(InvalidContext);
ZTMAF_DEFINE_ERROR(EncodingOverflow);
ZTMAF_DEFINE_ERROR(SessionAborted);
ZTMAF_DEFINE_ERROR(PlacementError);
ZTMAF_DEFINE_ERROR(SchedulingError);
ZTMAF_DEFINE_ERROR(CostModelError);
ZTMAF_DEFINE_ERROR(TraceOrderError);
ZTMAF_DEFINE_ERROR(InvariantViolation);
ZTMAF_DEFINE_ERROR(IoError);

#undef ZTMAF_DEFINE_ERROR

class TraceParseError : public Error
{
public:
  TraceParseError(std::size_t line, const std::string &what)
    : Error("trace line " + std::to_string(line) + ": " + what), line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Carries the dotted key path of the offending configuration entry.
class ConfigError : public Error
{
public:
  ConfigError(std::string key, const std::string &what)
    : Error(key + ": " + what), key_(std::move(key))
  {}

  const std::string &key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace ztmaf
