#pragma once

#include <stdexcept>
#include <string>

namespace mentor {

// Bad input: malformed bundle, out-of-range ids, invalid parameters.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite loss, gradient or parameter during optimization.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mentor
