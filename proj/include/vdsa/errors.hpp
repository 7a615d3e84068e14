#pragma once

#include <stdexcept>
#include <string>

namespace vdsa {

// Invalid or inconsistent configuration, including malformed input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search or enumeration would exceed its configured size guard.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure. The message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace CSV. `line()` is 1-based and counts the header.
class TraceParseError : public ConfigError {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vdsa
