#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qholo/geometry.hpp"
#include "qholo/numerics.hpp"

namespace qholo {

// Parameters of the echo protocol: a rotating-approach trajectory plus the two
// inverse-power terms of interest. The leading term is nulled at t*, exposing
// the probe term's phase.
struct EchoParams {
  double initial_separation = 1.0;   // L
  double approach_speed = 0.0;       // v
  double angular_velocity = 0.0;     // w
  double state_separation = 0.1;     // x0
  int leading_term = 1;              // n1, term whose phase is driven to zero
  int probe_term = 2;                // n2 > n1, term measured at the null
  double leading_coefficient = 1.0;  // c_{n1}
  double probe_coefficient = 1.0;    // c_{n2}
};

inline RotatingApproachTrajectory trajectory(const EchoParams& p) {
  return {p.initial_separation, p.approach_speed, p.angular_velocity, p.state_separation};
}

// t_bar = L / v, when the two planes meet; +infinity for v = 0.
inline double collision_time(const EchoParams& p) {
  if (p.approach_speed <= 0.0) return std::numeric_limits<double>::infinity();
  return p.initial_separation / p.approach_speed;
}

namespace detail {

inline double coefficient_for(const EchoParams& p, int n) {
  if (n == p.leading_term) return p.leading_coefficient;
  if (n == p.probe_term) return p.probe_coefficient;
  return 1.0;
}

// Coefficient-free integrand of the term-wise phase:
// d11^-n + d22^-n - d12^-n - d21^-n.
inline double term_phase_integrand(const RotatingApproachTrajectory& traj, int n, double t) {
  const Distances d = rotating_distances(traj, t);
  return reciprocal_power(d[0], n) + reciprocal_power(d[3], n) - reciprocal_power(d[1], n) -
         reciprocal_power(d[2], n);
}

}  // namespace detail

// Term-wise phase
//   phi_n(t) = c_n int_0^t [d11^-n + d22^-n - d12^-n - d21^-n] dtau.
// The coefficient multiplies outside the integral, so phi_n is exactly linear in c_n.
inline double term_phase(const EchoParams& p, int n, double t, const QuadratureSpec& spec = {}) {
  const RotatingApproachTrajectory traj = trajectory(p);
  detail::require_in_horizon(t, horizon(traj));
  return detail::coefficient_for(p, n) *
         integrate([&](double tau) { return detail::term_phase_integrand(traj, n, tau); }, 0.0,
                   t, spec);
}

// Largest zero t* of the leading-term phase before collision, located by a
// sign-change scan (64 points per rotation half-period, capped at 1e6) and
// bisection to bracket width < 1e-10 * t_bar and |phi| < 1e-9. For v = 0 the
// search covers one rotation period and finds the symmetry null at pi / w.
// Throws NoRootFound when the scan detects no sign change (e.g. w = 0).
inline double find_null_time(const EchoParams& p, const QuadratureSpec& spec = {}) {
  const RotatingApproachTrajectory traj = trajectory(p);
  const double omega = std::abs(p.angular_velocity);
  const double guard = 1e-6;
  double scale;  // sets both the search end and the bracket-width target
  if (p.approach_speed > 0.0) {
    scale = std::min(horizon(traj), collision_time(p));
  } else {
    if (!(omega > 0.0)) throw NoRootFound("find_null_time: no finite search window");
    scale = 2.0 * std::acos(-1.0) / omega;
  }
  const double t_end = scale * (1.0 - guard);

  long points = 65;
  if (omega > 0.0) {
    const double half_period = std::acos(-1.0) / omega;
    const double wanted = std::min(std::ceil(64.0 * t_end / half_period), 1e6);
    points = std::clamp(static_cast<long>(wanted) + 1, long{65}, long{1'000'000});
  }

  const int n = p.leading_term;
  const double c = detail::coefficient_for(p, n);
  CumulativeIntegral cumulative(
      [traj, n](double tau) { return detail::term_phase_integrand(traj, n, tau); }, 0.0, spec);
  const auto phase = [&](double t) { return c * cumulative(t); };

  // Scan for the last sign change on (0, t_end]; the phase vanishes at t = 0
  // by construction, so the origin itself is not a candidate.
  double prev_t = 0.0;
  double prev_g = 0.0;
  double lo = 0.0, hi = 0.0, g_lo = 0.0;
  double exact = -1.0;
  bool have_bracket = false;
  for (long i = 1; i < points; ++i) {
    const double t = t_end * (static_cast<double>(i) / (points - 1));
    const double g = phase(t);
    if (g == 0.0 && t > 0.0) {
      exact = t;
    } else if (prev_g != 0.0 && g != 0.0 && std::signbit(g) != std::signbit(prev_g)) {
      lo = prev_t;
      hi = t;
      g_lo = prev_g;
      have_bracket = true;
    }
    prev_t = t;
    prev_g = g;
  }
  if (!have_bracket && exact < 0.0)
    throw NoRootFound("find_null_time: no sign change of the leading-term phase before t = " +
                      std::to_string(t_end));
  if (!have_bracket || exact > hi) return exact;

  const double width_tol = 1e-10 * scale;
  const double value_tol = 1e-9;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 240; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double g_mid = phase(mid);
    if (g_mid == 0.0) return mid;
    if (std::signbit(g_mid) == std::signbit(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
    if (hi - lo < width_tol && std::abs(g_mid) < value_tol) break;
  }
  return mid;
}

// Probe-term phase at the null of the leading term; nonzero whenever v, w != 0.
inline double probe_phase_at_null(const EchoParams& p, const QuadratureSpec& spec = {}) {
  return term_phase(p, p.probe_term, find_null_time(p, spec), spec);
}

// Phases of every term below the probe at time t (typically the null time).
// The protocol nulls the single leading term; phases the search does not
// control are reported here rather than solved for.
inline std::vector<std::pair<int, double>> residual_phases(const EchoParams& p, double t,
                                                           const QuadratureSpec& spec = {}) {
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(p.probe_term - 1));
  for (int n = 1; n < p.probe_term; ++n) out.emplace_back(n, term_phase(p, n, t, spec));
  return out;
}

// One point of the (w, v) sweep.
struct EchoSweepRecord {
  double angular_velocity = 0.0;  // w
  double approach_speed = 0.0;    // v
  double null_time = 0.0;         // t*
  double collision_time = 0.0;    // t_bar = L / v
  double probe_phase = 0.0;       // phi_{n2}(t*)
  bool converged = false;
};

namespace detail {

inline EchoSweepRecord sweep_record(const EchoParams& p, const QuadratureSpec& spec) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  EchoSweepRecord rec{p.angular_velocity, p.approach_speed, nan, collision_time(p), nan, false};
  try {
    rec.null_time = find_null_time(p, spec);
    rec.probe_phase = term_phase(p, p.probe_term, rec.null_time, spec);
    rec.converged = true;
  } catch (const NoRootFound&) {
  } catch (const QuadratureFailure&) {
  }
  return rec;
}

}  // namespace detail

// Records for every (w, v) pair, ordered w outer, v inner. Records are
// distributed over `threads` workers (<= 0 selects hardware concurrency); each
// record's computation is pure, so the result does not depend on scheduling.
inline std::vector<EchoSweepRecord> sweep(const EchoParams& base,
                                          std::span<const double> angular_velocities,
                                          std::span<const double> speeds, int threads = 0,
                                          const QuadratureSpec& spec = {}) {
  std::vector<EchoParams> jobs;
  jobs.reserve(angular_velocities.size() * speeds.size());
  for (const double omega : angular_velocities) {
    for (const double v : speeds) {
      EchoParams p = base;
      p.angular_velocity = omega;
      p.approach_speed = v;
      jobs.push_back(p);
    }
  }
  std::vector<EchoSweepRecord> records(jobs.size());
  if (jobs.empty()) return records;

  unsigned n_workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));

  if (n_workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      records[i] = detail::sweep_record(jobs[i], spec);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
        records[i] = detail::sweep_record(jobs[i], spec);
    });
  }
  for (auto& t : workers) t.join();
  return records;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// CSV serialization, one row per record in sweep order; floats carry 17
// significant digits. The optional trailing column is log10 |phi2|.
inline void write_sweep_csv(std::ostream& os, std::span<const EchoSweepRecord> records,
                            bool log10_column = false) {
  os << "omega,v,t_star,t_bar,phi2,converged";
  if (log10_column) os << ",log10_phi2";
  os << '\n';
  for (const EchoSweepRecord& r : records) {
    os << detail::format_double(r.angular_velocity) << ',' << detail::format_double(r.approach_speed)
       << ',' << detail::format_double(r.null_time) << ',' << detail::format_double(r.collision_time)
       << ',' << detail::format_double(r.probe_phase) << ',' << (r.converged ? 1 : 0);
    if (log10_column) os << ',' << detail::format_double(std::log10(std::abs(r.probe_phase)));
    os << '\n';
  }
}

}  // namespace qholo
