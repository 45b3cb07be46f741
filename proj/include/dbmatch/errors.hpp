#pragma once

#include <stdexcept>
#include <string>

namespace dbmatch {

/// Invalid distribution, grid, or harness configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called with arguments outside its precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A seed batch whose second half cannot be obtained from the first.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A desk-scale size guard refused the request.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dbmatch
