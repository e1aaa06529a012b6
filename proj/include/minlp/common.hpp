#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace minlp {

using VarId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Point evaluation hit a singularity (log of nonpositive, sqrt of
// negative, reciprocal of zero).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// An interval operation has no admissible input (e.g. log of [-2,-1]).
struct EmptyDomain : std::runtime_error {
  explicit EmptyDomain(const std::string& what) : std::runtime_error(what) {}
};

// A relaxation was requested over an infinite interval.
struct UnboundedBox : std::runtime_error {
  explicit UnboundedBox(const std::string& what) : std::runtime_error(what) {}
};

// An integer assignment violates bounds or integrality.
struct AssignmentError : std::runtime_error {
  explicit AssignmentError(const std::string& what) : std::runtime_error(what) {}
};

// A discrete variable is not binary where a binary one is required.
struct NonBinaryError : std::runtime_error {
  explicit NonBinaryError(const std::string& what) : std::runtime_error(what) {}
};

// Iteration/time limits or numerical breakdown inside a kernel solver.
struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

inline bool approxEq(double a, double b, double tol = 1e-9) {
  return std::fabs(a - b) <= tol * (1.0 + std::fabs(a) + std::fabs(b));
}

}  // namespace minlp
