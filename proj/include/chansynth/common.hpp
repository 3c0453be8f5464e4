#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace chansynth {

// Thrown when an exact enumeration or dense tensor would exceed the
// capacity guard. CLI maps this to exit code 3.
class CapacityError : public std::runtime_error {
public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed configs / problem files. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {
// Normalization tolerance for distributions (double precision headroom).
inline constexpr double kNormalization = 1e-12;
// Constraint slack accepted when certifying an optimizer result.
inline constexpr double kConstraintSlack = 1e-9;
// Relative objective convergence for iterative solvers.
inline constexpr double kObjectiveRel = 1e-10;
// Dense-tensor / enumeration capacity guard (number of cells or weighted terms).
inline constexpr std::size_t kCapacityGuard = 10'000'000;
}  // namespace tol

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace chansynth
