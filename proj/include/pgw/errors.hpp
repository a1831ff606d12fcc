#pragma once

#include <stdexcept>
#include <string>

namespace pgw {

// Bad arguments, malformed files, violated preconditions. CLI exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation that started from valid inputs failed to produce a usable
// result (non-finite values, solver breakdown). CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// normalize_scale on a degenerate point set (all points identical).
struct NoScaleError : InputError {
  explicit NoScaleError(const std::string& msg) : InputError(msg) {}
};

// Unreadable or inconsistent input file contents.
struct MalformedInputError : InputError {
  explicit MalformedInputError(const std::string& msg) : InputError(msg) {}
};

}  // namespace pgw
