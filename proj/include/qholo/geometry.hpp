#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "qholo/errors.hpp"
#include "qholo/potential.hpp"

namespace qholo {

using Vec3 = Eigen::Vector3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

// Cross distances between the internal states of the two bodies,
// ordered (d11, d12, d21, d22).
using Distances = Eigen::Vector4d;

// Positions of the two internal states of body A and body B; together a point
// in R^12.
struct StateConfiguration {
  Vec3 r_a1 = Vec3::Zero();
  Vec3 r_a2 = Vec3::Zero();
  Vec3 r_b1 = Vec3::Zero();
  Vec3 r_b2 = Vec3::Zero();
};

inline Distances distances(const StateConfiguration& c) {
  return {(c.r_a1 - c.r_b1).norm(), (c.r_a1 - c.r_b2).norm(),
          (c.r_a2 - c.r_b1).norm(), (c.r_a2 - c.r_b2).norm()};
}

inline Vec12 coordinates(const StateConfiguration& c) {
  Vec12 x;
  x << c.r_a1, c.r_a2, c.r_b1, c.r_b2;
  return x;
}

inline StateConfiguration from_coordinates(const Vec12& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9)};
}

// All four cross distances strictly positive.
inline bool valid(const StateConfiguration& c) {
  return (distances(c).array() > 0.0).all();
}

// h(x) = f(d11) + f(d22) - f(d12) - f(d21). Vanishing h along a trajectory is
// exactly the condition under which the interaction cannot entangle the bodies.
inline double constraint_residual(const Distances& d, const Potential& p) {
  for (int k = 0; k < 4; ++k) detail::require_positive_distance(d[k]);
  return eval(p, d[0]) + eval(p, d[3]) - eval(p, d[1]) - eval(p, d[2]);
}

inline double constraint_residual(const StateConfiguration& c, const Potential& p) {
  return constraint_residual(distances(c), p);
}

// Central finite-difference gradient of h with respect to the 12 coordinates.
// step <= 0 selects the default 1e-6 * (minimum cross distance).
inline Vec12 constraint_gradient(const StateConfiguration& c, const Potential& p,
                                 double step = 0.0) {
  const Distances d = distances(c);
  for (int k = 0; k < 4; ++k) detail::require_positive_distance(d[k]);
  if (step <= 0.0) step = 1e-6 * d.minCoeff();
  const Vec12 x = coordinates(c);
  Vec12 grad;
  for (int i = 0; i < 12; ++i) {
    Vec12 xp = x;
    Vec12 xm = x;
    xp[i] += step;
    xm[i] -= step;
    grad[i] = (constraint_residual(from_coordinates(xp), p) -
               constraint_residual(from_coordinates(xm), p)) /
              (2.0 * step);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct StaticTrajectory {
  StateConfiguration configuration;
};

// Four states on a line: d11 = x, d12 = d21 = x + dx, d22 = x + 2 dx.
struct CollinearStaticTrajectory {
  double base_distance = 1.0;  // x
  double state_offset = 0.0;   // dx
};

// Two bodies on parallel planes approaching at constant speed while body B
// rotates in its plane about the midpoint of its two states:
//   d11(t) = d22(t) = sqrt((L - v t)^2 + x0^2 sin^2(w t / 2))
//   d12(t) = d21(t) = sqrt((L - v t)^2 + x0^2 cos^2(w t / 2))
struct RotatingApproachTrajectory {
  double initial_separation = 1.0;  // L, plane distance at t = 0
  double approach_speed = 0.0;      // v >= 0
  double angular_velocity = 0.0;    // w
  double state_separation = 0.1;    // x0, distance between the two states of one body
};

// Piecewise-linear interpolation of configurations between strictly increasing
// sample times starting at 0. Positions are interpolated, not distances.
struct SampledTrajectory {
  std::vector<double> times;
  std::vector<StateConfiguration> configurations;
};

using Trajectory = std::variant<StaticTrajectory, CollinearStaticTrajectory,
                                RotatingApproachTrajectory, SampledTrajectory>;

inline void validate(const SampledTrajectory& s) {
  if (s.times.size() != s.configurations.size())
    throw std::invalid_argument("sampled trajectory: times/configurations size mismatch");
  if (s.times.size() < 2)
    throw std::invalid_argument("sampled trajectory: requires at least two samples");
  if (s.times.front() != 0.0)
    throw std::invalid_argument("sampled trajectory: first sample must be at t = 0");
  for (std::size_t i = 1; i < s.times.size(); ++i)
    if (!(s.times[i] > s.times[i - 1]))
      throw std::invalid_argument("sampled trajectory: times must be strictly increasing");
  for (const auto& c : s.configurations)
    if (!valid(c))
      throw std::invalid_argument("sampled trajectory: degenerate configuration");
}

inline void validate(const Trajectory& traj) {
  struct Check {
    void operator()(const StaticTrajectory& s) const {
      if (!valid(s.configuration))
        throw std::invalid_argument("static trajectory: degenerate configuration");
    }
    void operator()(const CollinearStaticTrajectory& c) const {
      if (!(c.base_distance > 0.0) || !(c.base_distance + c.state_offset > 0.0) ||
          !(c.base_distance + 2.0 * c.state_offset > 0.0))
        throw std::invalid_argument("collinear trajectory: distances must stay positive");
    }
    void operator()(const RotatingApproachTrajectory& r) const {
      if (!(r.initial_separation > 0.0))
        throw std::invalid_argument("rotating approach: requires L > 0");
      if (r.approach_speed < 0.0)
        throw std::invalid_argument("rotating approach: requires v >= 0");
    }
    void operator()(const SampledTrajectory& s) const { validate(s); }
  };
  std::visit(Check{}, traj);
}

namespace detail {

inline Distances rotating_distances(const RotatingApproachTrajectory& r, double t) {
  const double plane = r.initial_separation - r.approach_speed * t;
  const double half_angle = 0.5 * r.angular_velocity * t;
  const double same = std::hypot(plane, r.state_separation * std::sin(half_angle));
  const double cross = std::hypot(plane, r.state_separation * std::cos(half_angle));
  return {same, cross, cross, same};
}

// Scan f over [lo, hi] at the given resolution, then narrow the best bracket
// by golden-section. Returns (argmin, min).
template <class F>
std::pair<double, double> scan_minimum(F&& f, double lo, double hi, double resolution) {
  const long n = std::max<long>(3, std::lround((hi - lo) / resolution) + 1);
  double best_t = lo;
  double best_f = f(lo);
  for (long i = 1; i < n; ++i) {
    const double t = lo + (hi - lo) * (static_cast<double>(i) / (n - 1));
    const double ft = f(t);
    if (ft < best_f) {
      best_f = ft;
      best_t = t;
    }
  }
  const double h = (hi - lo) / (n - 1);
  double a = std::max(lo, best_t - h);
  double b = std::min(hi, best_t + h);
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * (std::abs(b) + 1.0); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, f(t)};
}

}  // namespace detail

// First time a cross distance closes to zero; +infinity when none does.
// Distances can only close at plane contact t = L / v, so the search scans the
// minimum distance in a window around that time and refines the best bracket.
inline double horizon(const RotatingApproachTrajectory& r) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (r.approach_speed <= 0.0) return inf;
  const double t_bar = r.initial_separation / r.approach_speed;
  const auto min_distance = [&](double t) {
    const Distances d = detail::rotating_distances(r, t);
    return std::min(d[0], d[1]);
  };
  double window;
  double resolution;
  if (r.angular_velocity > 0.0) {
    const double half_period = std::acos(-1.0) / r.angular_velocity;
    window = half_period;
    resolution = half_period / 100.0;
  } else {
    window = 0.01 * t_bar;
    resolution = window / 100.0;
  }
  const double lo = std::max(0.0, t_bar - window);
  const double hi = t_bar + window;
  const auto [t_touch, m] = detail::scan_minimum(min_distance, lo, hi, resolution);
  const double touch_tol = 1e-9 * (r.initial_separation + r.state_separation);
  // A distance vanishes only where both the plane separation and the in-plane
  // arm vanish, so a detected touch always sits at plane contact.
  (void)t_touch;
  return m <= touch_tol ? t_bar : inf;
}

inline double horizon(const Trajectory& traj) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  struct Horizon {
    double operator()(const StaticTrajectory&) const { return inf; }
    double operator()(const CollinearStaticTrajectory&) const { return inf; }
    double operator()(const RotatingApproachTrajectory& r) const { return horizon(r); }
    double operator()(const SampledTrajectory& s) const { return s.times.back(); }
  };
  return std::visit(Horizon{}, traj);
}

namespace detail {

inline void require_in_horizon(double t, double t_max) {
  if (!(t >= 0.0) || !(t < t_max)) throw OutOfHorizon(t, t_max);
}

inline StateConfiguration lerp(const StateConfiguration& a, const StateConfiguration& b,
                               double u) {
  return {a.r_a1 + u * (b.r_a1 - a.r_a1), a.r_a2 + u * (b.r_a2 - a.r_a2),
          a.r_b1 + u * (b.r_b1 - a.r_b1), a.r_b2 + u * (b.r_b2 - a.r_b2)};
}

inline StateConfiguration sampled_configuration(const SampledTrajectory& s, double t) {
  const auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  const auto i = static_cast<std::size_t>(it - s.times.begin());
  if (i == 0) return s.configurations.front();
  if (i >= s.times.size()) return s.configurations.back();
  const double t0 = s.times[i - 1];
  const double t1 = s.times[i];
  return lerp(s.configurations[i - 1], s.configurations[i], (t - t0) / (t1 - t0));
}

// Distance accessor without the horizon check; callers guarantee 0 <= t < t_max.
// Quadrature integrands sample trajectories heavily, and the rotating-approach
// horizon is itself a search, so the check must not sit on this path.
inline Distances distances_at_unchecked(const Trajectory& traj, double t) {
  struct At {
    double t;
    Distances operator()(const StaticTrajectory& s) const { return distances(s.configuration); }
    Distances operator()(const CollinearStaticTrajectory& c) const {
      const double x = c.base_distance;
      const double dx = c.state_offset;
      return {x, x + dx, x + dx, x + 2.0 * dx};
    }
    Distances operator()(const RotatingApproachTrajectory& r) const {
      return rotating_distances(r, t);
    }
    Distances operator()(const SampledTrajectory& s) const {
      return distances(sampled_configuration(s, t));
    }
  };
  return std::visit(At{t}, traj);
}

}  // namespace detail

// Explicit positions realizing the trajectory at time t.
inline StateConfiguration configuration_at(const Trajectory& traj, double t) {
  detail::require_in_horizon(t, horizon(traj));
  struct At {
    double t;
    StateConfiguration operator()(const StaticTrajectory& s) const { return s.configuration; }
    StateConfiguration operator()(const CollinearStaticTrajectory& c) const {
      const double x = c.base_distance;
      const double dx = c.state_offset;
      return {Vec3(0, 0, 0), Vec3(-dx, 0, 0), Vec3(x, 0, 0), Vec3(x + dx, 0, 0)};
    }
    StateConfiguration operator()(const RotatingApproachTrajectory& r) const {
      const double half = 0.5 * r.state_separation;
      const double plane = r.initial_separation - r.approach_speed * t;
      const double angle = r.angular_velocity * t;
      const Vec3 arm(half * std::cos(angle), half * std::sin(angle), 0.0);
      return {Vec3(half, 0, 0), Vec3(-half, 0, 0), Vec3(0, 0, plane) + arm,
              Vec3(0, 0, plane) - arm};
    }
    StateConfiguration operator()(const SampledTrajectory& s) const {
      return detail::sampled_configuration(s, t);
    }
  };
  return std::visit(At{t}, traj);
}

// The four cross distances at time t. The rotating approach uses its closed
// form, so the d11 = d22 and d12 = d21 pairings hold exactly.
inline Distances distances_at(const Trajectory& traj, double t) {
  detail::require_in_horizon(t, horizon(traj));
  return detail::distances_at_unchecked(traj, t);
}

}  // namespace qholo
