#pragma once

#include <stdexcept>
#include <string>

namespace boundeff {

// Invalid parameters or malformed input. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not produce a usable result (singular system,
// non-finite model, ...). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace boundeff
