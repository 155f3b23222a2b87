#pragma once

#include <stdexcept>
#include <string>

namespace npca {

// Invalid input: bad parameter, malformed scenario or config file.
// CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical or engine failure on valid input. CLI maps this to exit code 2.
class EngineError : public std::runtime_error {
public:
  explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace npca
