#pragma once

#include <stdexcept>
#include <string>

namespace wforget {

// Tensor or parameter dimensions do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structurally valid input with an out-of-contract value (bad label, empty
// subset, fraction outside [0,1], ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Config text could not be parsed or contains unknown/missing keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg), line(0) {}
  ConfigError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  int line;
};

// File read/write failure or integrity check failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wforget
