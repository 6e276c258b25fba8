#pragma once

#include <stdexcept>
#include <string>

namespace edlab {

// Base for everything this library throws, so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// grid
struct DisconnectedNetwork : Error { using Error::Error; };
struct SingularSusceptance : Error { using Error::Error; };
struct NoSlack : Error { using Error::Error; };
struct MultipleSlack : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// lp / curve
struct Infeasible : Error { using Error::Error; };
struct Unbounded : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct RecursionDepthExceeded : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };

// dist / kernel
struct InvalidProbability : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct EmpiricalNotDifferentiable : Error { using Error::Error; };

// data / learn
struct EmptyDataset : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ": " + what),
        line(line) {}
  std::size_t line;
};
struct NonMonotoneTimestamps : Error { using Error::Error; };
struct NegativeLoad : Error { using Error::Error; };
struct GapError : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace edlab
