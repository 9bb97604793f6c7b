#include "meshdispatch/utility.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace meshdispatch {

std::string_view to_string(UtilityFamily family) {
  switch (family) {
    case UtilityFamily::kLinear: return "linear";
    case UtilityFamily::kLog: return "log";
    case UtilityFamily::kPoly: return "poly";
  }
  return "unknown";
}

UtilityFamily parse_family(std::string_view name) {
  if (name == "linear") return UtilityFamily::kLinear;
  if (name == "log") return UtilityFamily::kLog;
  if (name == "poly") return UtilityFamily::kPoly;
  throw Error("unknown utility family '" + std::string(name) + "'");
}

double UtilitySpec::value(double x) const {
  switch (family) {
    case UtilityFamily::kLinear: return coeff * x;
    case UtilityFamily::kLog: return coeff * std::log1p(x);
    case UtilityFamily::kPoly: return coeff * std::sqrt(x);
  }
  return 0.0;
}

double UtilitySpec::marginal(double x) const {
  switch (family) {
    case UtilityFamily::kLinear: return coeff;
    case UtilityFamily::kLog: return coeff / (1.0 + x);
    case UtilityFamily::kPoly:
      return coeff / (2.0 * std::sqrt(std::max(x, kDerivClamp)));
  }
  return 0.0;
}

double UtilitySpec::marginal_inverse(double price, double offset) const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double target = price - offset;  // required f'(x)
  switch (family) {
    case UtilityFamily::kLinear:
      return coeff > target ? kInf : 0.0;
    case UtilityFamily::kLog:
      if (target <= 0.0) return kInf;
      return std::max(coeff / target - 1.0, 0.0);
    case UtilityFamily::kPoly: {
      if (target <= 0.0) return kInf;
      const double root = coeff / (2.0 * target);
      return root * root;
    }
  }
  return 0.0;
}

double job_utility(const Job& job, const UnitMap& x) {
  double total = 0.0;
  for (const auto& [unit, amount] : x) {
    if (!job.per_unit_cap.contains(unit))
      throw Error("job " + std::to_string(job.id) + ": unit " + to_key(unit) +
                  " not available");
    total += job.utility.value(amount);
  }
  return total;
}

double cluster_utility(const Job& job, const ResourceMesh& mesh,
                       const UnitMap& x) {
  double total = 0.0;
  for (const auto& [unit, amount] : x) {
    const auto it = job.cluster_weight.find(unit);
    if (it == job.cluster_weight.end()) {
      if (amount == 0.0) continue;
      throw Error("job " + std::to_string(job.id) + ": no beta for unit " +
                  to_key(unit));
    }
    total += it->second * amount / mesh.capacity(unit);
  }
  return total;
}

WelfareBounds welfare_bounds(const Scenario& scenario) {
  if (scenario.jobs.empty()) throw Error("welfare bounds of an empty job list");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Job& job : scenario.jobs) {
    for (UnitId unit : available_units(job, scenario.mesh)) {
      const double slope =
          job.cluster_weight.at(unit) / scenario.mesh.capacity(unit);
      const double cap = job.per_unit_cap.at(unit);
      lo = std::min(lo, job.utility.marginal(cap) + slope);
      hi = std::max(hi, job.utility.marginal(0.0) + slope);
    }
  }
  if (!std::isfinite(lo)) throw Error("no job has an available unit");
  return {lo, hi};
}

ConjugatePoint conjugate_value(const UtilitySpec& utility, double slope,
                               double cap, double price) {
  if (cap <= 0.0) return {0.0, 0.0};
  const double x = std::clamp(utility.marginal_inverse(price, slope), 0.0, cap);
  const double value = utility.value(x) + (slope - price) * x;
  // x = 0 is always feasible with value 0; guards rounding on flat pieces.
  if (value <= 0.0) return {0.0, 0.0};
  return {value, x};
}

ConjugatePoint conjugate_value(const Job& job, const ResourceMesh& mesh,
                               UnitId unit, double price) {
  const double slope = job.cluster_weight.at(unit) / mesh.capacity(unit);
  return conjugate_value(job.utility, slope, job.per_unit_cap.at(unit), price);
}

}  // namespace meshdispatch
