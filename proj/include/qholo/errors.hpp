#pragma once

#include <stdexcept>
#include <string>

namespace qholo {

// A distance d <= 0: potentials and constraint functions are defined for d > 0 only.
struct NonPositiveDistance : std::domain_error {
  explicit NonPositiveDistance(double d)
      : std::domain_error("non-positive distance d = " + std::to_string(d)) {}
};

// Requested inverse-power term is not part of the potential.
struct MissingTerm : std::domain_error {
  explicit MissingTerm(int n)
      : std::domain_error("potential has no d^-" + std::to_string(n) + " term") {}
};

// Trajectory queried at a time outside its validity horizon [0, t_max).
struct OutOfHorizon : std::domain_error {
  OutOfHorizon(double t, double t_max)
      : std::domain_error("time t = " + std::to_string(t) +
                          " outside trajectory horizon [0, " + std::to_string(t_max) + ")") {}
};

// State norm deviates from 1 beyond the allowed tolerance.
struct NotNormalized : std::domain_error {
  explicit NotNormalized(double norm)
      : std::domain_error("state is not normalized, |psi| = " + std::to_string(norm)) {}
};

// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : std::runtime_error {
  explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

// No sign change detected on the root-search grid.
struct NoRootFound : std::runtime_error {
  explicit NoRootFound(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qholo
