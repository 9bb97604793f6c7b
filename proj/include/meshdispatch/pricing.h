#pragma once

#include <limits>

#include "meshdispatch/utility.h"

namespace meshdispatch {

// Returned by marginal_cost beyond capacity. Solvers clamp allocations so that
// this value never enters gradient arithmetic.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct AlphaSolution {
  double alpha = 2.0;
  double residual = 0.0;
};

// Solves a - 1 = 1/(a - 1) + ln((a*ratio - 1)/(a - 1)) by bisection on
// [1 + 1e-6, 64]. The left side minus the right side is strictly increasing
// in a, so the root is unique; it is >= 2 for every ratio >= 1.
// Throws for ratio < 1, non-finite ratio, or a bracket without a sign change.
AlphaSolution solve_alpha(double ratio);

// Residual of the alpha equation, exposed for checks.
double alpha_equation_residual(double alpha, double ratio);

// Marginal cost of one resource unit as a function of its utilization:
//   iota                                  on [0, threshold)
//   scale * exp(alpha * w / C) + iota / alpha   on [threshold, C]
//   infinite                              beyond C
// with threshold = C / (alpha - 1) and
// scale = (upsilon - iota) / (exp(alpha) - exp(alpha / (alpha - 1))).
// When upsilon == iota the curve is flat at iota on all of [0, C].
class PricingCurve {
 public:
  PricingCurve() = default;
  PricingCurve(double capacity, WelfareBounds bounds, double alpha);
  // Solves alpha from the bounds.
  PricingCurve(double capacity, WelfareBounds bounds);

  double capacity() const { return capacity_; }
  double iota() const { return iota_; }
  double upsilon() const { return upsilon_; }
  double alpha() const { return alpha_; }
  double threshold() const { return threshold_; }
  bool flat() const { return flat_; }

  // Sentinel kInfiniteCost for omega > capacity.
  double marginal_cost(double omega) const;
  // Integral of the marginal cost over [omega_start, omega_start + x].
  // Throws when the interval leaves [0, capacity].
  double cost_integral(double omega_start, double x) const;

  // Same formulas with the exponential piece continued past capacity and the
  // flat piece continued below zero. Used where iterates may leave the box.
  double extended_cost(double omega) const;
  double extended_integral(double omega_start, double x) const;

 private:
  double capacity_ = 1.0;
  double iota_ = 1.0;
  double upsilon_ = 1.0;
  double alpha_ = 2.0;
  double threshold_ = 1.0;
  double scale_ = 0.0;
  double rate_ = 0.0;  // alpha / C
  bool flat_ = true;
};

// Free-function spellings of the curve operations.
inline double marginal_cost(const PricingCurve& curve, double omega) {
  return curve.marginal_cost(omega);
}
inline double cost_integral(const PricingCurve& curve, double omega_start,
                            double x) {
  return curve.cost_integral(omega_start, x);
}

}  // namespace meshdispatch
