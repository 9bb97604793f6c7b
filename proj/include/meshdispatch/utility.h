#pragma once

#include "meshdispatch/mesh.h"
#include "meshdispatch/utility_spec.h"

namespace meshdispatch {

// Global bounds on the marginal social welfare f'_nr(x) + beta_nr / C_r.
struct WelfareBounds {
  double iota = 1.0;
  double upsilon = 1.0;

  double ratio() const { return upsilon / iota; }
};

// Sum of f_nr(x_r). Throws if x names a unit outside the job's cap map.
double job_utility(const Job& job, const UnitMap& x);

// Sum of beta_nr * x_r / C_r. Throws if a unit with x_r != 0 has no beta.
double cluster_utility(const Job& job, const ResourceMesh& mesh,
                       const UnitMap& x);

// Marginal welfare is largest at x = 0 (x = kDerivClamp for poly) and
// smallest at x = cap, so the extrema over every (n, r) give iota and upsilon.
// Jobs without available units do not contribute. Throws if no job has one.
WelfareBounds welfare_bounds(const Scenario& scenario);

struct ConjugatePoint {
  double value = 0.0;
  double maximizer = 0.0;
};

// max over x in [0, cap] of f(x) + slope*x - price*x, where slope = beta/C.
ConjugatePoint conjugate_value(const UtilitySpec& utility, double slope,
                               double cap, double price);

// Convenience overload reading cap, beta and C_r from the job and mesh.
ConjugatePoint conjugate_value(const Job& job, const ResourceMesh& mesh,
                               UnitId unit, double price);

}  // namespace meshdispatch
