#pragma once

#include <stdexcept>
#include <string>

namespace cloudinv {

// Raised for bad user input: malformed configs, out-of-range parameters,
// unreadable input files. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation fails at runtime (solver breakdown, overflow,
// unwritable output). The CLI maps these to exit code 2.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cloudinv
