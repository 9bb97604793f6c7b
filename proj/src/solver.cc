#include "meshdispatch/solver.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "block_minimize.h"
#include "projected_descent.h"

namespace meshdispatch {

std::string_view to_string(InnerMethod method) {
  switch (method) {
    case InnerMethod::kExact: return "exact";
    case InnerMethod::kGradient: return "gradient";
  }
  return "unknown";
}

InnerMethod parse_inner_method(std::string_view name) {
  for (InnerMethod m : {InnerMethod::kExact, InnerMethod::kGradient})
    if (to_string(m) == name) return m;
  throw Error("unknown inner method '" + std::string(name) + "'");
}

SolverConfig SolverConfig::published() {
  SolverConfig c;
  c.sigma0 = 0.97;
  c.growth = 1.002;
  c.theta1 = 0.99;
  c.theta2 = 0.999;
  c.eta_final = 0.1;
  c.eps_final = 10.0;
  c.learning_rate = 2.0;
  c.decay = 0.95;
  c.inner = InnerMethod::kGradient;
  return c;
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error("solver config: " + what);
  };
  if (!(sigma0 > 0.0)) fail("sigma0 must be > 0");
  if (!(growth > 1.0)) fail("growth must be > 1");
  if (!(theta1 > 0.0 && theta1 <= theta2 && theta2 <= 1.0))
    fail("need 0 < theta1 <= theta2 <= 1");
  if (!(eta_final > 0.0)) fail("eta must be > 0");
  if (!(eps_final > 0.0)) fail("eps must be > 0");
  if (!(learning_rate > 0.0)) fail("learning rate must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) fail("decay must lie in (0, 1)");
  if (max_outer <= 0 || max_inner <= 0) fail("iteration limits must be > 0");
}

SolverState SolverState::initial(std::size_t n, const SolverConfig& config) {
  SolverState s;
  s.x.assign(n, 0.0);
  s.y.assign(n, 0.0);
  s.z.assign(n, 0.0);
  s.sigma = config.sigma0;
  s.eta = 1.0 / config.sigma0;
  s.eps = 1.0 / std::pow(config.sigma0, config.theta1);
  return s;
}

double Allocation::total() const {
  return std::accumulate(x.begin(), x.end(), 0.0);
}

namespace {

// Penalty ceiling; beyond it the coupling term swamps the objective's
// curvature and the inner descent stalls. Past it only the duals move.
constexpr double kMaxPenalty = 1e6;

double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

// Lagrangian value with the gradient written into `grad`.
double lagrangian(std::span<const double> x, double mu,
                  std::span<const double> y, std::span<const double> z,
                  double sigma, const PseudoWelfareProblem& p,
                  std::span<double> grad) {
  const double budget_term = std::max(mu / sigma + sum(x) - p.workload, 0.0);
  double value = 0.5 * sigma * (budget_term * budget_term - mu * mu /
                                (sigma * sigma));
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double xr = x[r];
    const PricingCurve& curve = p.curves[r];
    value += curve.extended_integral(p.omega[r], xr) - p.utility.value(xr) -
             p.slope[r] * xr;
    const double upper = std::max(y[r] / sigma + xr - p.cap[r], 0.0);
    const double lower = std::max(z[r] / sigma - xr, 0.0);
    value += 0.5 * sigma *
             (upper * upper - y[r] * y[r] / (sigma * sigma) + lower * lower -
              z[r] * z[r] / (sigma * sigma));
    grad[r] = curve.extended_cost(p.omega[r] + xr) - p.utility.marginal(xr) -
              p.slope[r] + sigma * (budget_term + upper - lower);
  }
  return value;
}

// Absolute-value form of the violation degree: zero exactly when x is
// feasible and complementary to the current multipliers.
double complementarity_residual(const SolverState& s,
                                const PseudoWelfareProblem& p) {
  double v = std::abs(std::max(sum(s.x) - p.workload, -s.mu / s.sigma));
  for (std::size_t r = 0; r < s.x.size(); ++r) {
    v += std::abs(std::max(s.x[r] - p.cap[r], -s.y[r] / s.sigma));
    v += std::abs(std::max(-s.x[r], -s.z[r] / s.sigma));
  }
  return v;
}

}  // namespace

Slacks optimal_slacks(const SolverState& state,
                      const PseudoWelfareProblem& problem) {
  const double sigma = state.sigma;
  Slacks out;
  out.s = std::max(-state.mu / sigma + problem.workload - sum(state.x), 0.0);
  out.l.resize(state.x.size());
  out.q.resize(state.x.size());
  for (std::size_t r = 0; r < state.x.size(); ++r) {
    out.l[r] =
        std::max(-state.y[r] / sigma + problem.cap[r] - state.x[r], 0.0);
    out.q[r] = std::max(-state.z[r] / sigma + state.x[r], 0.0);
  }
  return out;
}

LagrangianEval lagrangian_value_grad(const SolverState& state,
                                     const PseudoWelfareProblem& problem) {
  LagrangianEval out;
  out.grad.resize(state.x.size());
  out.value = lagrangian(state.x, state.mu, state.y, state.z, state.sigma,
                         problem, out.grad);
  return out;
}

double violation_degree(const SolverState& state,
                        const PseudoWelfareProblem& problem) {
  const double sigma = state.sigma;
  double v = std::max(sum(state.x) - problem.workload, -state.mu / sigma);
  for (std::size_t r = 0; r < state.x.size(); ++r) {
    v += std::max(state.x[r] - problem.cap[r], -state.y[r] / sigma);
    v += std::max(-state.x[r], -state.z[r] / sigma);
  }
  return v;
}

double pseudo_welfare(const PseudoWelfareProblem& problem,
                      const std::vector<double>& x) {
  double w = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    w += problem.utility.value(x[r]) + problem.slope[r] * x[r] -
         problem.curves[r].cost_integral(problem.omega[r], x[r]);
  }
  return w;
}

namespace {

Allocation finish(const PseudoWelfareProblem& problem, std::vector<double> x,
                  double mu, bool converged, int outer) {
  Allocation out;
  out.units = problem.units;
  out.mu = mu;
  out.converged = converged;
  out.outer_iterations = outer;
  for (std::size_t r = 0; r < x.size(); ++r) {
    out.welfare += problem.utility.value(x[r]) + problem.slope[r] * x[r];
    out.cost_paid += problem.curves[r].cost_integral(problem.omega[r], x[r]);
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

Allocation solve_pseudo_welfare(const PseudoWelfareProblem& problem,
                                const SolverConfig& config) {
  config.validate();
  const std::size_t n = problem.size();
  if (problem.slope.size() != n || problem.omega.size() != n ||
      problem.cap.size() != n || problem.curves.size() != n)
    throw Error("pseudo-welfare problem: inconsistent sizes");
  for (double c : problem.cap)
    if (!(c >= 0.0)) throw Error("pseudo-welfare problem: negative cap");

  if (n == 0 || sum(problem.cap) == 0.0)
    return finish(problem, std::vector<double>(n, 0.0), 0.0, true, 0);

  SolverState state = SolverState::initial(n, config);
  double step = config.learning_rate;

  std::vector<double> best(n, 0.0);  // x = 0 is feasible with welfare 0
  double best_value = 0.0;
  std::vector<double> candidate(n), grad(n);

  auto value_grad = [&](const std::vector<double>& x, std::vector<double>& g) {
    return lagrangian(x, state.mu, state.y, state.z, state.sigma, problem, g);
  };

  bool converged = false;
  int outer = 0;
  for (; outer < config.max_outer; ++outer) {
    state.outer_iter = outer;
    const double tol = std::min(state.eta, config.eta_final);
    double mapping = 0.0;
    if (config.inner == InnerMethod::kGradient) {
      mapping = detail::projected_descent(value_grad, state.x, problem.cap,
                                          tol, config.max_inner, step,
                                          config.decay, config.learning_rate)
                    .mapping_norm;
    } else {
      const double s = state.sigma;
      detail::minimize_coupled(
          [&](std::size_t r, double xr) {
            return problem.curves[r].extended_cost(problem.omega[r] + xr) -
                   problem.utility.marginal(xr) - problem.slope[r] +
                   s * std::max(state.y[r] / s + xr - problem.cap[r], 0.0) -
                   s * std::max(state.z[r] / s - xr, 0.0);
          },
          problem.cap, s, state.mu / s - problem.workload, state.x);
      value_grad(state.x, grad);
      mapping = detail::gradient_mapping_norm(state.x, grad, problem.cap);
    }

    candidate = state.x;
    detail::project_capped_box(candidate, problem.cap, problem.workload);
    const double value = pseudo_welfare(problem, candidate);
    if (value > best_value) {
      best_value = value;
      best = candidate;
    }

    const double v = complementarity_residual(state, problem);
    if (v <= state.eps || state.sigma >= kMaxPenalty) {
      if (mapping <= config.eta_final && v <= config.eps_final) {
        converged = true;
        break;
      }
      const double excess = sum(state.x) - problem.workload;
      state.mu = std::max(state.mu + state.sigma * excess, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        state.y[r] =
            std::max(state.y[r] + state.sigma * (state.x[r] - problem.cap[r]),
                     0.0);
        state.z[r] = std::max(state.z[r] - state.sigma * state.x[r], 0.0);
      }
      state.eta = std::max(state.eta / state.sigma, config.eta_final);
      state.eps = std::max(state.eps / std::pow(state.sigma, config.theta2),
                           config.eps_final);
    } else {
      state.sigma = std::min(state.sigma * config.growth, kMaxPenalty);
      state.eta = 1.0 / state.sigma;
      state.eps = 1.0 / std::pow(state.sigma, config.theta1);
    }
  }

  const double mu =
      std::max(state.mu + state.sigma * (sum(state.x) - problem.workload), 0.0);
  if (converged) {
    candidate = state.x;
    detail::project_capped_box(candidate, problem.cap, problem.workload);
    return finish(problem, std::move(candidate), mu, true, outer + 1);
  }
  return finish(problem, std::move(best), mu, false, outer);
}

}  // namespace meshdispatch
