#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qholo/errors.hpp"

namespace qholo {

// Tolerances for adaptive quadrature: subdivision stops once the summed
// Richardson error estimate falls below
// max(absolute_tolerance, relative_tolerance * |integral|).
struct QuadratureSpec {
  double absolute_tolerance = 1e-12;
  double relative_tolerance = 1e-10;
  long max_subdivisions = 2'000'000;
};

namespace detail {

inline void check(const QuadratureSpec& spec) {
  if (!(spec.absolute_tolerance > 0) || !(spec.relative_tolerance > 0))
    throw std::invalid_argument("quadrature tolerances must be positive");
  if (spec.max_subdivisions < 2)
    throw std::invalid_argument("max_subdivisions must be at least 2");
}

inline double simpson_panel(double width, double fa, double fm, double fb) {
  return (width / 6.0) * (fa + 4.0 * fm + fb);
}

// One interval of the global subdivision. `value` carries the two-panel
// estimate plus its Richardson correction; `err` is the Richardson estimate
// |S2 - S1| / 15 of the remaining error.
struct SimpsonInterval {
  double a, m, b;
  double fa, fm, fb;
  double flm, frm;
  double value, err;
};

template <class F>
SimpsonInterval make_interval(F& f, double a, double m, double b, double fa, double fm,
                              double fb) {
  SimpsonInterval iv{a, m, b, fa, fm, fb, 0.0, 0.0, 0.0, 0.0};
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  iv.flm = f(lm);
  iv.frm = f(rm);
  const double whole = simpson_panel(b - a, fa, fm, fb);
  const double halves = simpson_panel(m - a, fa, iv.flm, fm) + simpson_panel(b - m, fm, iv.frm, fb);
  iv.value = halves + (halves - whole) / 15.0;
  iv.err = std::abs(halves - whole) / 15.0;
  return iv;
}

inline bool splittable(const SimpsonInterval& iv) {
  return 0.5 * (iv.a + iv.m) > iv.a && 0.5 * (iv.m + iv.b) > iv.m;
}

// Worst-error-first ordering; ties broken by position for determinism.
struct IntervalOrder {
  bool operator()(const SimpsonInterval& x, const SimpsonInterval& y) const {
    if (x.err != y.err) return x.err < y.err;
    return x.a > y.a;
  }
};

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b]: the interval with the largest
// Richardson error estimate is bisected until the summed estimate falls below
// max(absolute_tolerance, relative_tolerance * |integral|). Deterministic for
// a given spec.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  detail::check(spec);
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);

  std::vector<detail::SimpsonInterval> heap;
  const detail::IntervalOrder order;
  heap.push_back(detail::make_interval(f, a, m, b, fa, fm, fb));
  double total_value = heap.front().value;
  double total_err = heap.front().err;

  for (long splits = 0;; ++splits) {
    const double tol = std::max(spec.absolute_tolerance,
                                spec.relative_tolerance * std::abs(total_value));
    if (total_err <= tol) break;
    if (splits >= spec.max_subdivisions)
      throw QuadratureFailure("integrate: tolerance unreachable within max_subdivisions");
    std::pop_heap(heap.begin(), heap.end(), order);
    const detail::SimpsonInterval worst = heap.back();
    heap.pop_back();
    if (!detail::splittable(worst))
      throw QuadratureFailure("integrate: tolerance unreachable at floating-point resolution");
    total_value -= worst.value;
    total_err -= worst.err;
    const detail::SimpsonInterval left =
        detail::make_interval(f, worst.a, 0.5 * (worst.a + worst.m), worst.m, worst.fa, worst.flm,
                              worst.fm);
    const detail::SimpsonInterval right =
        detail::make_interval(f, worst.m, 0.5 * (worst.m + worst.b), worst.b, worst.fm, worst.frm,
                              worst.fb);
    total_value += left.value + right.value;
    total_err += left.err + right.err;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), order);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), order);
  }

  // Re-sum once to shed the drift accumulated by the incremental updates.
  double result = 0.0;
  for (const auto& iv : heap) result += iv.value;
  return result;
}

namespace detail {

// Bisection on a sign-change bracket [lo, hi], g(lo) and g(hi) of opposite sign.
template <class F>
double bisect(F& g, double lo, double hi, double g_lo, double width_tol) {
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if (std::signbit(g_mid) == std::signbit(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// All zeros of g on [a, b] located by a uniform scan of `scan_points` samples
// followed by bisection of each sign-change bracket to width 1e-12 * (b - a).
// Tangential zeros that do not change sign between samples are not detected.
template <class F>
std::vector<double> find_zeros(F&& g, double a, double b, long scan_points) {
  if (!(a < b)) throw std::invalid_argument("find_zeros: requires a < b");
  if (scan_points < 2) throw std::invalid_argument("find_zeros: requires scan_points >= 2");
  const double width_tol = 1e-12 * (b - a);
  std::vector<double> zeros;
  double prev_t = a;
  double prev_g = g(a);
  for (long i = 1; i < scan_points; ++i) {
    const double t = a + (b - a) * (static_cast<double>(i) / static_cast<double>(scan_points - 1));
    const double g_t = g(t);
    if (prev_g == 0.0) {
      zeros.push_back(prev_t);
    } else if (g_t != 0.0 && std::signbit(g_t) != std::signbit(prev_g)) {
      zeros.push_back(detail::bisect(g, prev_t, t, prev_g, width_tol));
    }
    prev_t = t;
    prev_g = g_t;
  }
  if (prev_g == 0.0) zeros.push_back(prev_t);
  return zeros;
}

// Cumulative integral F(t) = int_origin^t f, with prefix caching: a query at t
// integrates only from the nearest previously evaluated point below t. Queries
// at many nearby t (scans, bisection) then cost one pass over [origin, max t].
// Not thread-safe; use one instance per worker.
template <class F>
class CumulativeIntegral {
 public:
  explicit CumulativeIntegral(F f, double origin = 0.0, const QuadratureSpec& spec = {})
      : f_(std::move(f)), segment_spec_(spec) {
    detail::check(spec);
    // Segment errors accumulate along the prefix chain; tighten the per-segment
    // budget so chained results stay within the requested spec.
    segment_spec_.absolute_tolerance /= 16.0;
    segment_spec_.relative_tolerance /= 16.0;
    prefix_[origin] = 0.0;
  }

  double operator()(double t) {
    auto it = prefix_.upper_bound(t);
    if (it == prefix_.begin()) {
      // Below every cached point: integrate backwards, uncached.
      return it->second - integrate(f_, t, it->first, segment_spec_);
    }
    --it;
    if (it->first == t) return it->second;
    const double value = it->second + integrate(f_, it->first, t, segment_spec_);
    prefix_.emplace(t, value);
    return value;
  }

 private:
  F f_;
  QuadratureSpec segment_spec_;
  std::map<double, double> prefix_;
};

}  // namespace qholo
