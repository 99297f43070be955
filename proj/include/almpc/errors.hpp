#pragma once

#include <stdexcept>
#include <string>

namespace almpc {

// Error taxonomy shared across the toolkit. Everything derives from
// std::runtime_error so the C API boundary can catch one base type.

struct SingularGeometry : std::runtime_error {
  explicit SingularGeometry(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateScheduling : std::runtime_error {
  explicit DegenerateScheduling(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleBounds : std::runtime_error {
  explicit InfeasibleBounds(const std::string& what) : std::runtime_error(what) {}
};

struct DivergenceDetected : std::runtime_error {
  explicit DivergenceDetected(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateTargets : std::runtime_error {
  explicit DegenerateTargets(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyLog : std::runtime_error {
  explicit EmptyLog(const std::string& what) : std::runtime_error(what) {}
};

struct IoFailure : std::runtime_error {
  explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace almpc
