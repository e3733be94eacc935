#pragma once

#include <stdexcept>
#include <string>

namespace fisscan {

// Bad configuration: incompatible parameters, missing thresholds, unusable
// window sizes. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad input data: unreadable or malformed files, non-square images. CLI maps
// this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fisscan
