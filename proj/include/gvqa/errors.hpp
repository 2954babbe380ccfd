#pragma once

#include <stdexcept>
#include <string>

namespace gvqa {

// Bad config file or checkpoint/config mismatch. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data generation or oracle failure. CLI maps this to exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation requires trained/initialized parameters.
struct UninitializedError : std::logic_error {
  explicit UninitializedError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace gvqa
