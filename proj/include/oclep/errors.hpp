#pragma once

#include <stdexcept>
#include <string>

namespace oclep {

// Bad arguments or bad invocation (exit code 1 at the CLI).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unusable input data (exit code 2 at the CLI).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oclep
