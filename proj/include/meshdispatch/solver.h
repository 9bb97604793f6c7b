#pragma once

#include <string_view>
#include <vector>

#include "meshdispatch/pricing.h"

namespace meshdispatch {

// How each outer iteration minimizes the augmented Lagrangian over the box.
// kExact solves the one-coupling-constraint subproblem directly; kGradient is
// spectral projected gradient driven by learning_rate and decay.
enum class InnerMethod { kExact, kGradient };
std::string_view to_string(InnerMethod method);
InnerMethod parse_inner_method(std::string_view name);

// Hyper-parameters of the augmented Lagrangian method. published() carries the
// values published with the algorithm; defaults() is the configuration the
// library and CLI use (see README, "Solver configuration").
struct SolverConfig {
  double sigma0 = 1.0;          // initial penalty coefficient
  double growth = 2.0;          // penalty growth factor on a failed outer step
  double theta1 = 0.1;          // tolerance exponent after growth
  double theta2 = 0.9;          // tolerance exponent after a dual update
  double eta_final = 1e-7;      // final gradient-mapping tolerance
  double eps_final = 1e-7;      // final constraint-violation tolerance
  double learning_rate = 2.0;   // initial (and maximum) step size
  double decay = 0.95;          // step shrink factor on a rejected step
  int max_outer = 500;
  int max_inner = 200;
  InnerMethod inner = InnerMethod::kExact;

  static SolverConfig defaults() { return {}; }
  static SolverConfig published();

  // Throws Error describing the first invalid field.
  void validate() const;
};

// One arrival's pseudo-social-welfare problem, laid out densely over the
// job's available units in canonical order.
struct PseudoWelfareProblem {
  double workload = 0.0;             // budget on the sum of allocations
  UtilitySpec utility;
  std::vector<UnitId> units;
  std::vector<double> slope;         // beta_nr / C_r
  std::vector<double> omega;         // utilization before this job
  std::vector<double> cap;           // min(job cap, C_r - omega), >= 0
  std::vector<PricingCurve> curves;

  std::size_t size() const { return units.size(); }
};

struct SolverState {
  std::vector<double> x;
  double mu = 0.0;
  std::vector<double> y;  // duals of x <= cap
  std::vector<double> z;  // duals of x >= 0
  double sigma = 1.0;
  double eta = 1.0;
  double eps = 1.0;
  int outer_iter = 0;

  // x = 0, all duals 0, coefficients initialised from the config.
  static SolverState initial(std::size_t n, const SolverConfig& config);
};

struct Slacks {
  double s = 0.0;
  std::vector<double> l;
  std::vector<double> q;
};

struct LagrangianEval {
  double value = 0.0;
  std::vector<double> grad;
};

struct Allocation {
  std::vector<UnitId> units;
  std::vector<double> x;
  double mu = 0.0;
  double welfare = 0.0;    // sum of f_nr + g_nr at x
  double cost_paid = 0.0;  // sum of the pricing integrals at x
  bool converged = true;
  int outer_iterations = 0;

  double total() const;
};

// Minimisers of the augmented Lagrangian over the slack variables.
Slacks optimal_slacks(const SolverState& state,
                      const PseudoWelfareProblem& problem);

// Slack-eliminated augmented Lagrangian at state.x and its exact gradient.
// Off the box the pricing integral uses the continued curve.
LagrangianEval lagrangian_value_grad(const SolverState& state,
                                     const PseudoWelfareProblem& problem);

// Signed violation degree: sum of max{g_i(x), -lambda_i / sigma} over the
// budget and both box sides.
double violation_degree(const SolverState& state,
                        const PseudoWelfareProblem& problem);

// f + g - pricing integral at x (the quantity the arrival maximises).
double pseudo_welfare(const PseudoWelfareProblem& problem,
                      const std::vector<double>& x);

// Augmented Lagrangian method (inner solves per config.inner). The
// returned x satisfies the box and budget constraints exactly. When the outer
// loop exhausts max_outer, the best feasible iterate is returned with
// converged = false.
Allocation solve_pseudo_welfare(const PseudoWelfareProblem& problem,
                                const SolverConfig& config);

}  // namespace meshdispatch
