#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trackid {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is the 1-based physical line number, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct GeometryError : Error {
  using Error::Error;
};

struct AttributeError : Error {
  using Error::Error;
};

struct MetricError : Error {
  using Error::Error;
};

struct SynthError : Error {
  using Error::Error;
};

/// Failure inside one named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace trackid
