#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "qholo/geometry.hpp"
#include "qholo/numerics.hpp"

namespace qholo {

using Complex = std::complex<double>;

// Amplitudes over the basis (|1,1>, |1,2>, |2,1>, |2,2>).
using Amplitudes = Eigen::Vector4cd;

struct TwoQubitState {
  Amplitudes amplitudes = Amplitudes::Zero();
};

inline double norm(const TwoQubitState& s) { return s.amplitudes.norm(); }

// Expansion of a diagonal two-body Hamiltonian over {1x1, sz x 1, 1 x sz, sz x sz},
// with sz eigenvalue +1 on state 1 and -1 on state 2.
struct CouplingCoefficients {
  double scalar;  // 1 x 1
  double z_a;     // sz x 1
  double z_b;     // 1 x sz
  double zz;      // sz x sz, the only part that can entangle
};

inline CouplingCoefficients coupling_coefficients(double f11, double f12, double f21,
                                                  double f22) {
  return {0.25 * (f11 + f12 + f21 + f22), 0.25 * (f11 + f12 - f21 - f22),
          0.25 * (f11 - f12 + f21 - f22), 0.25 * (f11 - f12 - f21 + f22)};
}

inline CouplingCoefficients coupling_coefficients(const Distances& d, const Potential& p) {
  const Eigen::Vector4d f = eval(p, d);
  return coupling_coefficients(f[0], f[1], f[2], f[3]);
}

// Per-basis-state energies (f11, f12, f21, f22) reconstructed from the expansion.
inline Eigen::Vector4d basis_energies(const CouplingCoefficients& g) {
  return {g.scalar + g.z_a + g.z_b + g.zz, g.scalar + g.z_a - g.z_b - g.zz,
          g.scalar - g.z_a + g.z_b - g.zz, g.scalar - g.z_a - g.z_b + g.zz};
}

// (|1> + |2>)/sqrt(2) on each body.
inline TwoQubitState symmetric_product_state() {
  return {Amplitudes::Constant(Complex(0.5, 0.0))};
}

// The symmetric product state after a pure sz x sz rotation by angle phi:
// (e^{-i phi}/2) (e^{2 i phi} |1,1> + |1,2> + |2,1> + e^{2 i phi} |2,2>).
inline TwoQubitState zz_phase_state(double phi) {
  const Complex outer = std::polar(0.5, -phi);
  const Complex inner = std::polar(1.0, 2.0 * phi);
  return {Amplitudes{outer * inner, outer, outer, outer * inner}};
}

// Pure-state concurrence 2 |a d - b c|; 0 for product states, 1 for Bell states.
inline double concurrence(const TwoQubitState& s) {
  const double n = norm(s);
  if (std::abs(n - 1.0) > 1e-9) throw NotNormalized(n);
  const Amplitudes& a = s.amplitudes;
  return std::min(1.0, 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]));
}

// Exact evolution under the diagonal Hamiltonian H = sum f(d_ab) |a,b><a,b|
// (hbar = 1): each amplitude picks up exp(-i theta_ab) with
// theta_ab = int_0^t f(d_ab(tau)) dtau. Norm is preserved by construction.
inline TwoQubitState evolve(const Trajectory& traj, const Potential& p, double t,
                            const TwoQubitState& initial, const QuadratureSpec& spec = {}) {
  detail::require_in_horizon(t, horizon(traj));
  TwoQubitState out = initial;
  for (int k = 0; k < 4; ++k) {
    const double theta = integrate(
        [&](double tau) { return eval(p, detail::distances_at_unchecked(traj, tau)[k]); }, 0.0,
        t, spec);
    out.amplitudes[k] *= std::polar(1.0, -theta);
  }
  return out;
}

// Accumulated phase of the entangling part of the evolution:
// Phi(t) = int_0^t [f(d11) + f(d22) - f(d12) - f(d21)] dtau.
// For the symmetric product state, concurrence(evolve(t)) = |sin(Phi(t)/2)|.
inline double entangling_phase(const Trajectory& traj, const Potential& p, double t,
                               const QuadratureSpec& spec = {}) {
  detail::require_in_horizon(t, horizon(traj));
  return integrate(
      [&](double tau) {
        return constraint_residual(detail::distances_at_unchecked(traj, tau), p);
      },
      0.0, t, spec);
}

// Leading-order phase for the collinear power-law geometry
// (d11 = x, d12 = d21 = x + dx, d22 = x + 2 dx, dx << x):
// coupling * t * exponent (exponent + 1) dx^2 / x^(exponent + 2).
inline double collinear_leading_order_phase(double coupling, double exponent, double x,
                                            double dx, double t) {
  return coupling * t * exponent * (exponent + 1.0) * dx * dx / std::pow(x, exponent + 2.0);
}

}  // namespace qholo
