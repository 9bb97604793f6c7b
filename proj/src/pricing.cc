#include "meshdispatch/pricing.h"

#include <cmath>
#include <sstream>

namespace meshdispatch {

double alpha_equation_residual(double alpha, double ratio) {
  const double gap = alpha - 1.0;
  return gap - 1.0 / gap - std::log((alpha * ratio - 1.0) / gap);
}

AlphaSolution solve_alpha(double ratio) {
  if (!std::isfinite(ratio)) throw Error("alpha: ratio must be finite");
  if (ratio < 1.0) {
    std::ostringstream msg;
    msg << "alpha: ratio " << ratio << " < 1";
    throw Error(msg.str());
  }
  double lo = 1.0 + 1e-6;
  double hi = 64.0;
  const double f_lo = alpha_equation_residual(lo, ratio);
  const double f_hi = alpha_equation_residual(hi, ratio);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    std::ostringstream msg;
    msg << "alpha: no sign change on [" << lo << ", " << hi
        << "] for ratio " << ratio;
    throw Error(msg.str());
  }
  // Bisect to adjacent doubles.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = alpha_equation_residual(mid, ratio);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_lo = alpha_equation_residual(lo, ratio);
  const double r_hi = alpha_equation_residual(hi, ratio);
  if (std::abs(r_lo) <= std::abs(r_hi)) return {lo, std::abs(r_lo)};
  return {hi, std::abs(r_hi)};
}

PricingCurve::PricingCurve(double capacity, WelfareBounds bounds, double alpha)
    : capacity_(capacity),
      iota_(bounds.iota),
      upsilon_(bounds.upsilon),
      alpha_(alpha) {
  if (!(capacity > 0.0)) throw Error("pricing curve: capacity must be > 0");
  if (!(bounds.iota > 0.0) || bounds.upsilon < bounds.iota)
    throw Error("pricing curve: need 0 < iota <= upsilon");
  if (!(alpha > 1.0)) throw Error("pricing curve: alpha must exceed 1");
  flat_ = upsilon_ - iota_ <= 1e-12 * iota_;
  if (flat_) {
    threshold_ = capacity_;
    return;
  }
  threshold_ = capacity_ / (alpha_ - 1.0);
  rate_ = alpha_ / capacity_;
  // (upsilon - iota) / (e^a - e^b), rewritten to avoid overflow and
  // cancellation when a and b are close: scale * e^(rate*w) =
  // (upsilon - iota) * e^(rate*w - a) / (1 - e^(b - a)).
  const double b = alpha_ / (alpha_ - 1.0);
  scale_ = (upsilon_ - iota_) / -std::expm1(b - alpha_);
}

PricingCurve::PricingCurve(double capacity, WelfareBounds bounds)
    : PricingCurve(capacity, bounds, solve_alpha(bounds.ratio()).alpha) {}

double PricingCurve::extended_cost(double omega) const {
  if (flat_ || omega < threshold_) return iota_;
  return scale_ * std::exp(rate_ * omega - alpha_) + iota_ / alpha_;
}

double PricingCurve::marginal_cost(double omega) const {
  if (omega > capacity_) return kInfiniteCost;
  return extended_cost(omega);
}

double PricingCurve::extended_integral(double omega_start, double x) const {
  if (x == 0.0) return 0.0;
  const double end = omega_start + x;
  if (flat_) return iota_ * x;
  // Split at the threshold; on the exponential piece integrate directly so
  // short intervals keep full relative precision.
  double total = 0.0;
  double lo = std::min(omega_start, end);
  double hi = std::max(omega_start, end);
  if (lo < threshold_) {
    const double top = std::min(hi, threshold_);
    total += iota_ * (top - lo);
    lo = top;
  }
  if (hi > lo) {
    total += scale_ / rate_ * std::exp(rate_ * lo - alpha_) *
                 std::expm1(rate_ * (hi - lo)) +
             iota_ / alpha_ * (hi - lo);
  }
  return x >= 0.0 ? total : -total;
}

double PricingCurve::cost_integral(double omega_start, double x) const {
  const double slack = 1e-12 * capacity_;
  if (omega_start < -slack || x < -slack ||
      omega_start + x > capacity_ + slack) {
    std::ostringstream msg;
    msg << "cost integral over [" << omega_start << ", " << omega_start + x
        << "] leaves [0, " << capacity_ << "]";
    throw Error(msg.str());
  }
  return extended_integral(omega_start, x);
}

}  // namespace meshdispatch
