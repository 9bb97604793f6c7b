#pragma once

// Exact minimization of a separable convex function plus one shared
// quadratic penalty on the sum, over a box. Used as the inner step of both
// augmented Lagrangian loops.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace meshdispatch::detail {

// Root of a non-decreasing function on [lo, hi]; lo when it is already
// non-negative there, hi when it is still negative at hi.
template <class Fn>
double monotone_root(Fn&& fn, double lo, double hi) {
  if (fn(lo) >= 0.0) return lo;
  if (fn(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (fn(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Minimizes sum_i h_i(x_i) + sigma/2*max(a + sum_i x_i, 0)^2 over
// 0 <= x <= upper, where deriv(i, x) = h_i'(x) is non-decreasing in x.
// Writing t for the derivative of the shared penalty, each coordinate solves
// h_i'(x_i) + t = 0 on its interval and t solves t = sigma*max(a + sum x(t), 0).
// x(t) jumps where some h_i is linear, so the final bracket's two sides are
// blended to hit the sum the penalty asks for.
template <class Deriv>
void minimize_coupled(Deriv&& deriv, std::span<const double> upper,
                      double sigma, double a, std::span<double> out) {
  const std::size_t k = upper.size();
  std::vector<double> x_lo(k), x_hi(k), scratch(k);
  auto fill = [&](double t, std::vector<double>& xs) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      sum += xs[i] = monotone_root(
          [&](double xv) { return deriv(i, xv) + t; }, 0.0, upper[i]);
    return sum;
  };
  double cap_sum = 0.0;
  for (double u : upper) cap_sum += u;
  double t_lo = 0.0, t_hi = sigma * std::max(a + cap_sum, 0.0);
  double sum_lo = fill(t_lo, x_lo);
  double sum_hi = sum_lo;
  x_hi = x_lo;
  if (t_lo - sigma * std::max(a + sum_lo, 0.0) < 0.0) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (mid <= t_lo || mid >= t_hi) break;
      (mid - sigma * std::max(a + fill(mid, scratch), 0.0) < 0.0 ? t_lo : t_hi) =
          mid;
    }
    sum_lo = fill(t_lo, x_lo);
    sum_hi = fill(t_hi, x_hi);
  }
  const double t = 0.5 * (t_lo + t_hi);
  const double target = std::clamp(t / sigma - a, sum_hi, sum_lo);
  const double theta =
      sum_lo > sum_hi ? (target - sum_hi) / (sum_lo - sum_hi) : 1.0;
  for (std::size_t i = 0; i < k; ++i)
    out[i] = x_hi[i] + theta * (x_lo[i] - x_hi[i]);
}

}  // namespace meshdispatch::detail
