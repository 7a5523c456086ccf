#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>
#include <variant>

#include "qholo/errors.hpp"

namespace qholo {

// f(d) = value, independent of distance.
struct ConstantPotential {
  double value = 0.0;
};

// f(d) = coupling * d^-exponent, exponent > 0. Attractive couplings (< 0) are allowed.
struct PowerLawPotential {
  double coupling = 1.0;
  double exponent = 1.0;
};

// f(d) = sum_n coefficients[n] * d^-n over integer n >= 1.
struct LaurentPotential {
  std::map<int, double> coefficients;
};

using Potential = std::variant<ConstantPotential, PowerLawPotential, LaurentPotential>;

namespace detail {

inline void require_positive_distance(double d) {
  if (!(d > 0.0)) throw NonPositiveDistance(d);
}

// d^-n for integer n >= 1, by squaring.
template <class Scalar>
Scalar reciprocal_power(Scalar d, int n) {
  Scalar base = Scalar(1) / d;
  Scalar result = Scalar(1);
  for (unsigned k = static_cast<unsigned>(n); k != 0; k >>= 1) {
    if (k & 1u) result *= base;
    base *= base;
  }
  return result;
}

}  // namespace detail

// Structural validity: exponent > 0, Laurent keys are positive integers.
inline void validate(const Potential& p) {
  struct {
    void operator()(const ConstantPotential&) const {}
    void operator()(const PowerLawPotential& pl) const {
      if (!(pl.exponent > 0.0))
        throw std::invalid_argument("power-law exponent must be positive");
    }
    void operator()(const LaurentPotential& l) const {
      for (const auto& [n, c] : l.coefficients)
        if (n < 1) throw std::invalid_argument("Laurent terms require n >= 1");
    }
  } v;
  std::visit(v, p);
}

// f(d). Requires d > 0.
template <class Scalar = double>
Scalar eval(const Potential& p, Scalar d) {
  if (!(d > Scalar(0))) throw NonPositiveDistance(static_cast<double>(d));
  struct Eval {
    Scalar d;
    Scalar operator()(const ConstantPotential& c) const { return Scalar(c.value); }
    Scalar operator()(const PowerLawPotential& pl) const {
      return Scalar(pl.coupling) * std::pow(d, -Scalar(pl.exponent));
    }
    Scalar operator()(const LaurentPotential& l) const {
      Scalar sum = Scalar(0);
      for (const auto& [n, c] : l.coefficients) sum += Scalar(c) * detail::reciprocal_power(d, n);
      return sum;
    }
  };
  return std::visit(Eval{d}, p);
}

// The single term c_n * d^-n. Throws MissingTerm when the potential has no such term;
// a power law contributes exactly one term, at n = exponent when integral.
template <class Scalar = double>
Scalar eval_term(const Potential& p, int n, Scalar d) {
  if (!(d > Scalar(0))) throw NonPositiveDistance(static_cast<double>(d));
  struct EvalTerm {
    int n;
    Scalar d;
    Scalar operator()(const ConstantPotential&) const { throw MissingTerm(n); }
    Scalar operator()(const PowerLawPotential& pl) const {
      if (n < 1 || pl.exponent != static_cast<double>(n)) throw MissingTerm(n);
      return Scalar(pl.coupling) * detail::reciprocal_power(d, n);
    }
    Scalar operator()(const LaurentPotential& l) const {
      const auto it = l.coefficients.find(n);
      if (n < 1 || it == l.coefficients.end()) throw MissingTerm(n);
      return Scalar(it->second) * detail::reciprocal_power(d, n);
    }
  };
  return std::visit(EvalTerm{n, d}, p);
}

// Component-wise evaluation over a vector of distances.
inline Eigen::Vector4d eval(const Potential& p, const Eigen::Vector4d& distances) {
  return distances.unaryExpr([&](double d) { return eval(p, d); });
}

namespace detail {

// Like eval_term but absent terms contribute zero instead of throwing.
inline double term_or_zero(const Potential& p, int n, double d) {
  struct TermOrZero {
    int n;
    double d;
    double operator()(const ConstantPotential&) const { return 0.0; }
    double operator()(const PowerLawPotential& pl) const {
      if (n < 1 || pl.exponent != static_cast<double>(n)) return 0.0;
      return pl.coupling * reciprocal_power(d, n);
    }
    double operator()(const LaurentPotential& l) const {
      const auto it = l.coefficients.find(n);
      if (n < 1 || it == l.coefficients.end()) return 0.0;
      return it->second * reciprocal_power(d, n);
    }
  };
  return std::visit(TermOrZero{n, d}, p);
}

}  // namespace detail

// Whether |f_n(d)| > ratio * |f_{n+1}(d)| at every sampled d in [d_min, d_max].
// Mirrors the dominance assumption behind term-wise phase protocols.
inline bool term_dominates(const Potential& p, int n, double d_min, double d_max,
                           double ratio = 10.0, int samples = 33) {
  detail::require_positive_distance(d_min);
  if (!(d_max >= d_min)) throw std::invalid_argument("term_dominates: requires d_max >= d_min");
  if (samples < 1) throw std::invalid_argument("term_dominates: requires samples >= 1");
  for (int i = 0; i < samples; ++i) {
    const double d =
        samples == 1 ? d_min : d_min + (d_max - d_min) * (static_cast<double>(i) / (samples - 1));
    const double lead = std::abs(detail::term_or_zero(p, n, d));
    const double next = std::abs(detail::term_or_zero(p, n + 1, d));
    if (!(lead > ratio * next)) return false;
  }
  return true;
}

}  // namespace qholo
