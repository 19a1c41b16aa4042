#pragma once

#include <stdexcept>
#include <string>

namespace ggo {

/// Base class for every error raised by the library. The category string is
/// used by the command-line tool to pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

/// Malformed map, guidance, or model file. Messages carry line/column.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

/// Invalid configuration values or mismatched shapes.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class NoPathError : public Error {
 public:
  explicit NoPathError(const std::string& what) : Error("no-path", what) {}
};

class EmptyGoalSetError : public Error {
 public:
  explicit EmptyGoalSetError(const std::string& what) : Error("empty-goal-set", what) {}
};

class TooManyAgentsError : public Error {
 public:
  explicit TooManyAgentsError(const std::string& what) : Error("too-many-agents", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace ggo
