#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mgres {

/// Invalid user-facing configuration (grid sizes, partition counts, strategy parameters).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Every violation found while validating a configuration, reported together.
class ConfigValidationError : public ConfigError {
   public:
    explicit ConfigValidationError(std::vector<std::string> violations);
    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

   private:
    std::vector<std::string> violations_;
};

/// A configuration file that cannot be opened or read.
class ConfigIoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Violation of a simulator invariant, e.g. touching the data of a dead rank.
class SimulationError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

}  // namespace mgres
