#pragma once

#include <stdexcept>
#include <string>

namespace stabclt {

/// Raised for any violated precondition on user-supplied data
/// (dimension mismatch, empty input, malformed config values).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Output directory or file could not be created or written.
class OutputError : public std::runtime_error {
 public:
  explicit OutputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stabclt
