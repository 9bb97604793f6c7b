#pragma once

// Internal helpers shared by the per-arrival solver and the offline oracle.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace meshdispatch::detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// || x - P(x - g) ||: zero exactly at box-constrained stationary points.
inline double gradient_mapping_norm(std::span<const double> x,
                                    std::span<const double> g,
                                    std::span<const double> upper) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - std::clamp(x[i] - g[i], 0.0, upper[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

struct DescentOutcome {
  int iterations = 0;
  double value = 0.0;
  double mapping_norm = 0.0;
};

// Spectral projected gradient on [0, upper]. Trial steps come from the
// Barzilai-Borwein quotient (the first one is `step`), clipped to
// [1e-12, 1e12] * max_step; each search direction P(x - a g) - x is
// backtracked by `decay` under a non-monotone Armijo test over the last
// kMemory values. On return `step` holds the last spectral step, so a
// warm restart picks up where this call stopped.
// `value_grad(x, grad)` returns the objective and fills grad.
template <class ValueGrad>
DescentOutcome projected_descent(ValueGrad&& value_grad, std::vector<double>& x,
                                 std::span<const double> upper, double tol,
                                 int max_iter, double& step, double decay,
                                 double max_step) {
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  const double lo_step = 1e-12 * max_step;
  const double hi_step = 1e12 * max_step;
  const std::size_t n = x.size();
  std::vector<double> g(n), d(n), trial(n), trial_g(n);
  std::vector<double> recent;
  DescentOutcome out;
  double f = value_grad(x, g);
  step = std::clamp(step, lo_step, hi_step);
  for (;;) {
    out.mapping_norm = gradient_mapping_norm(x, g, upper);
    if (out.mapping_norm <= tol || out.iterations >= max_iter) break;
    if (recent.size() == kMemory) recent.erase(recent.begin());
    recent.push_back(f);
    const double reference = *std::max_element(recent.begin(), recent.end());

    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = std::clamp(x[i] - step * g[i], 0.0, upper[i]) - x[i];
      slope += g[i] * d[i];
    }
    double lambda = 1.0;
    double f_trial = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = std::clamp(x[i] + lambda * d[i], 0.0, upper[i]);
      f_trial = value_grad(trial, trial_g);
      const double slack = 1e-14 * (1.0 + std::abs(f));
      if (f_trial <= reference + kArmijo * lambda * slope + slack ||
          lambda < 1e-12)
        break;
      lambda *= decay;
    }
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = trial[i] - x[i];
      ss += si * si;
      sy += si * (trial_g[i] - g[i]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, lo_step, hi_step) : hi_step;
    x.swap(trial);
    g.swap(trial_g);
    f = f_trial;
    ++out.iterations;
  }
  out.value = f;
  return out;
}

// Euclidean projection onto {0 <= x <= upper, sum(x) <= budget}.
inline void project_capped_box(std::vector<double>& x,
                               std::span<const double> upper, double budget) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], 0.0, upper[i]);
    total += x[i];
  }
  if (total <= budget) return;
  // Shift every coordinate down by lambda; sum is non-increasing in lambda.
  double lo = 0.0;
  double hi = *std::max_element(x.begin(), x.end());
  auto shifted_sum = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += std::clamp(x[i] - lambda, 0.0, upper[i]);
    return s;
  };
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shifted_sum(mid) > budget ? lo : hi) = mid;
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i] - hi, 0.0, upper[i]);
}

}  // namespace meshdispatch::detail
