#pragma once

#include <string_view>
#include <vector>

#include "meshdispatch/dispatch.h"

namespace meshdispatch {

// Worker count from MESHDISPATCH_THREADS, else hardware concurrency (>= 1).
int default_thread_count();

struct OfflineSolution {
  double welfare = 0.0;  // sum f + sum g at the returned allocation
  double welfare_jobs = 0.0;
  double welfare_cluster = 0.0;
  std::vector<UnitMap> allocation;  // per job, in scenario order
  bool converged = true;
  int outer_iterations = 0;
};

// Configuration used for the joint program unless one is supplied: the
// library defaults with a larger outer budget.
SolverConfig offline_config();

// How the joint program is solved. The interior-point method is the default;
// the augmented Lagrangian one reuses the online solver's outer loop with
// exact block minimization and can stall when unit capacities bind.
enum class OfflineMethod { kInteriorPoint, kAugmentedLagrangian };
std::string_view to_string(OfflineMethod method);
OfflineMethod parse_offline_method(std::string_view name);

// Joint welfare maximization over every job with full knowledge: per-job
// budgets, per-unit caps and the unit capacities sum_n x_nr <= C_r. The
// returned allocation is always feasible.
OfflineSolution offline_optimum(const Scenario& scenario,
                                const SolverConfig& config = offline_config(),
                                OfflineMethod method = OfflineMethod::kInteriorPoint);

// Exhaustive search over multiples of grid_step (each coordinate up to its
// cap), skipping infeasible points. Needs at most kBruteForceMaxDim decision
// variables in total.
inline constexpr std::size_t kBruteForceMaxDim = 6;
double brute_force_optimum(const Scenario& scenario, double grid_step);

struct RatioEntry {
  long long seed = 0;
  double theta_star = 0.0;
  double theta_on = 0.0;
  double ratio = 1.0;  // infinite when theta_on <= 0 < theta_star
  double alpha_hat = 2.0;
  bool infinite = false;
  bool offline_converged = true;

  // ratio <= alpha_hat + slack
  bool bound_ok(double slack = 0.05) const {
    return !infinite && ratio <= alpha_hat + slack;
  }
};

struct RatioReport {
  // Fields of the scenario with the largest ratio.
  double theta_star = 0.0;
  double theta_on = 0.0;
  double ratio = 1.0;
  double alpha_hat = 2.0;
  std::vector<RatioEntry> per_scenario;
  bool any_infinite = false;
};

// Offline optimum against an online policy (OnSocMax unless given) per
// scenario. Scenarios are evaluated in parallel (threads = 0 picks the
// default pool size). alpha_hat is the bound for the scenario's welfare
// ratio whichever policy runs.
RatioReport competitive_ratio(const std::vector<Scenario>& scenarios,
                              const SolverConfig& config,
                              const SolverConfig& offline = offline_config(),
                              int threads = 0,
                              Policy policy = Policy::kOnSocMax,
                              OfflineMethod method = OfflineMethod::kInteriorPoint);

}  // namespace meshdispatch
