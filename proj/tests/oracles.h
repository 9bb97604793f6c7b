#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's closed forms for the quantity being checked.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "meshdispatch/solver.h"

namespace oracle {

inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

inline double central_difference(const std::function<double(double)>& f,
                                  double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// The pricing curve written out from its definition.
inline double reference_price(double iota, double upsilon, double alpha,
                              double capacity, double w) {
  if (upsilon == iota) return iota;
  const double threshold = capacity / (alpha - 1.0);
  if (w < threshold) return iota;
  const double scale =
      (upsilon - iota) / (std::exp(alpha) - std::exp(alpha / (alpha - 1.0)));
  return scale * std::exp(alpha * w / capacity) + iota / alpha;
}

inline double utility_value(meshdispatch::UtilityFamily family, double a,
                            double x) {
  switch (family) {
    case meshdispatch::UtilityFamily::kLinear: return a * x;
    case meshdispatch::UtilityFamily::kLog: return a * std::log(x + 1.0);
    case meshdispatch::UtilityFamily::kPoly: return a * std::sqrt(x);
  }
  return 0.0;
}

// max over a uniform grid of `points` values on [0, cap] of f + slope*x - p*x.
inline std::pair<double, double> grid_conjugate(
    meshdispatch::UtilityFamily family, double a, double slope, double cap,
    double price, int points) {
  double best = -std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = cap * i / (points - 1);
    const double v = utility_value(family, a, x) + slope * x - price * x;
    if (v > best) best = v, arg = x;
  }
  return {best, arg};
}

// Pseudo-welfare term of one coordinate, with the cost integral by quadrature.
inline double pseudo_term(const meshdispatch::PseudoWelfareProblem& p,
                          std::size_t r, double x) {
  const auto& c = p.curves[r];
  const double cost = integrate(
      [&](double u) {
        return reference_price(c.iota(), c.upsilon(), c.alpha(), c.capacity(), u);
      },
      p.omega[r], p.omega[r] + x, 1e-10);
  return utility_value(p.utility.family, p.utility.coeff, x) + p.slope[r] * x -
         cost;
}

struct GridResult {
  double value = 0.0;
  std::vector<double> x;
};

// Exhaustive search over `points` values per coordinate on
// [0, min(cap_r, workload)], skipping points over the budget. The objective
// is separable, so each coordinate's terms are tabulated once.
inline GridResult grid_pseudo_welfare(const meshdispatch::PseudoWelfareProblem& p,
                                      int points) {
  const std::size_t n = p.size();
  std::vector<double> span(n);
  std::vector<std::vector<double>> table(n, std::vector<double>(points));
  for (std::size_t r = 0; r < n; ++r) {
    span[r] = std::min(p.cap[r], p.workload);
    for (int i = 0; i < points; ++i)
      table[r][i] = pseudo_term(p, r, span[r] * i / (points - 1));
  }
  GridResult best;
  best.x.assign(n, 0.0);
  std::vector<int> idx(n, 0);
  for (;;) {
    double sum = 0.0, value = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += span[r] * idx[r] / (points - 1);
      value += table[r][idx[r]];
    }
    if (sum <= p.workload + 1e-12 && value > best.value) {
      best.value = value;
      for (std::size_t r = 0; r < n; ++r) best.x[r] = span[r] * idx[r] / (points - 1);
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == points) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace oracle
