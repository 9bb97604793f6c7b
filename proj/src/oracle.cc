#include "meshdispatch/oracle.h"

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>

#include <Eigen/Cholesky>  // LDLT
#include <Eigen/Core>

#include "block_minimize.h"
#include "parallel.h"
#include "projected_descent.h"

namespace meshdispatch {

int default_thread_count() {
  if (const char* env = std::getenv("MESHDISPATCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

namespace {
constexpr double kMaxPenalty = 1e12;
constexpr double kBarrierGap = 1e-10;
}  // namespace

SolverConfig offline_config() {
  SolverConfig c = SolverConfig::defaults();
  c.max_outer = 2000;
  c.max_inner = 1000;
  return c;
}

namespace {

// The joint program flattened over every (job, available unit) pair.
struct JointProblem {
  std::vector<int> job_of;          // per variable
  std::vector<std::size_t> row_of;  // per variable: dense index of its unit
  std::vector<UnitId> unit_of;
  std::vector<double> cap;
  std::vector<double> slope;
  std::vector<double> workload;     // per job
  std::vector<UtilitySpec> utility; // per job
  std::vector<double> capacity;     // per used unit

  std::size_t size() const { return job_of.size(); }
};

JointProblem flatten(const Scenario& scenario) {
  JointProblem p;
  std::vector<long> row(scenario.mesh.unit_count(), -1);
  for (std::size_t n = 0; n < scenario.jobs.size(); ++n) {
    const Job& job = scenario.jobs[n];
    p.workload.push_back(job.workload);
    p.utility.push_back(job.utility);
    for (UnitId u : available_units(job, scenario.mesh)) {
      const std::size_t idx = scenario.mesh.index(u);
      if (row[idx] < 0) {
        row[idx] = static_cast<long>(p.capacity.size());
        p.capacity.push_back(scenario.mesh.capacity(u));
      }
      p.job_of.push_back(static_cast<int>(n));
      p.row_of.push_back(static_cast<std::size_t>(row[idx]));
      p.unit_of.push_back(u);
      p.cap.push_back(std::min(job.per_unit_cap.at(u), scenario.mesh.capacity(u)));
      p.slope.push_back(job.cluster_weight.at(u) / scenario.mesh.capacity(u));
    }
  }
  return p;
}

struct Multipliers {
  std::vector<double> mu;      // per job
  std::vector<double> lambda;  // per unit
  double sigma = 1.0;
};

void sums(const JointProblem& p, std::span<const double> x,
          std::vector<double>& per_job, std::vector<double>& per_unit) {
  per_job.assign(p.workload.size(), 0.0);
  per_unit.assign(p.capacity.size(), 0.0);
  for (std::size_t v = 0; v < x.size(); ++v) {
    per_job[p.job_of[v]] += x[v];
    per_unit[p.row_of[v]] += x[v];
  }
}

double welfare_at(const JointProblem& p, std::span<const double> x) {
  double w = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v)
    w += p.utility[p.job_of[v]].value(x[v]) + p.slope[v] * x[v];
  return w;
}

// Scales each job onto its budget, then each unit onto its capacity. Both
// steps only shrink coordinates, so the result satisfies every constraint.
void repair(const JointProblem& p, std::vector<double>& x) {
  for (std::size_t v = 0; v < x.size(); ++v) x[v] = std::clamp(x[v], 0.0, p.cap[v]);
  std::vector<double> per_job, per_unit;
  sums(p, x, per_job, per_unit);
  for (std::size_t v = 0; v < x.size(); ++v) {
    const double total = per_job[p.job_of[v]];
    const double budget = p.workload[p.job_of[v]];
    if (total > budget) x[v] *= budget / total;
  }
  sums(p, x, per_job, per_unit);
  for (std::size_t v = 0; v < x.size(); ++v) {
    const double total = per_unit[p.row_of[v]];
    const double c = p.capacity[p.row_of[v]];
    if (total > c) x[v] *= c / total;
  }
}

struct SweepOutcome {
  int sweeps = 0;
  double mapping_norm = 0.0;
};

// Exact minimization over one block of variables of
//   sum_i [ -f(x_i) - slope_i*x_i + sigma/2*max(base_i + x_i, 0)^2 ]
//     + sigma/2*max(a + sum_i x_i, 0)^2
// on the box.
void minimize_block(const JointProblem& p, double sigma,
                    std::span<const std::size_t> vars,
                    std::span<const double> base, double a,
                    std::span<double> out) {
  std::vector<double> upper(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) upper[i] = p.cap[vars[i]];
  detail::minimize_coupled(
      [&](std::size_t i, double xv) {
        const std::size_t v = vars[i];
        return -p.utility[p.job_of[v]].marginal(xv) - p.slope[v] +
               sigma * std::max(base[i] + xv, 0.0);
      },
      upper, sigma, a, out);
}

// Block coordinate descent on the augmented Lagrangian, alternating between
// job blocks (shared budget penalty) and unit blocks (shared capacity
// penalty). Stops once the gradient mapping norm is at most `tol`.
SweepOutcome block_descent(const JointProblem& p,
                           const std::vector<std::vector<std::size_t>>& by_job,
                           const std::vector<std::vector<std::size_t>>& by_unit,
                           const Multipliers& m, std::vector<double>& x,
                           double tol, int max_sweeps) {
  const double s = m.sigma;
  std::vector<double> per_job, per_unit;
  sums(p, x, per_job, per_unit);
  std::vector<double> g(x.size()), base, next;
  auto job_base = [&](std::size_t v) {
    const int j = p.job_of[v];
    return m.mu[j] / s + per_job[j] - x[v] - p.workload[j];
  };
  auto unit_base = [&](std::size_t v) {
    const std::size_t r = p.row_of[v];
    return m.lambda[r] / s + per_unit[r] - x[v] - p.capacity[r];
  };
  auto mapping = [&] {
    for (std::size_t v = 0; v < x.size(); ++v)
      g[v] = -p.utility[p.job_of[v]].marginal(x[v]) - p.slope[v] +
             s * std::max(job_base(v) + x[v], 0.0) +
             s * std::max(unit_base(v) + x[v], 0.0);
    return detail::gradient_mapping_norm(x, g, p.cap);
  };
  auto commit = [&](std::span<const std::size_t> vars) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::size_t v = vars[i];
      per_job[p.job_of[v]] += next[i] - x[v];
      per_unit[p.row_of[v]] += next[i] - x[v];
      x[v] = next[i];
    }
  };
  SweepOutcome out;
  out.mapping_norm = mapping();
  while (out.mapping_norm > tol && out.sweeps < max_sweeps) {
    for (std::size_t j = 0; j < by_job.size(); ++j) {
      const auto& vars = by_job[j];
      if (vars.empty()) continue;
      base.resize(vars.size());
      next.resize(vars.size());
      for (std::size_t i = 0; i < vars.size(); ++i) base[i] = unit_base(vars[i]);
      minimize_block(p, s, vars, base, m.mu[j] / s - p.workload[j], next);
      commit(vars);
    }
    for (std::size_t r = 0; r < by_unit.size(); ++r) {
      const auto& vars = by_unit[r];
      if (vars.size() < 2) continue;  // a lone variable was just minimized
      base.resize(vars.size());
      next.resize(vars.size());
      for (std::size_t i = 0; i < vars.size(); ++i) base[i] = job_base(vars[i]);
      minimize_block(p, s, vars, base, m.lambda[r] / s - p.capacity[r], next);
      commit(vars);
    }
    ++out.sweeps;
    sums(p, x, per_job, per_unit);
    out.mapping_norm = mapping();
  }
  return out;
}



struct JointResult {
  std::vector<double> x;
  bool converged = false;
  int iterations = 0;
};

JointResult solve_alm(const JointProblem& p, const SolverConfig& config) {
  const std::size_t n = p.size();
  const std::size_t jobs = p.workload.size();
  const std::size_t rows = p.capacity.size();
  Multipliers m;
  m.mu.assign(jobs, 0.0);
  m.lambda.assign(rows, 0.0);
  m.sigma = config.sigma0;
  double eta = 1.0 / config.sigma0;
  double eps = 1.0 / std::pow(config.sigma0, config.theta1);

  std::vector<double> x(n, 0.0), per_job, per_unit;
  std::vector<std::vector<std::size_t>> by_job(jobs), by_unit(rows);
  for (std::size_t v = 0; v < n; ++v) {
    by_job[p.job_of[v]].push_back(v);
    by_unit[p.row_of[v]].push_back(v);
  }
  JointResult out;
  std::vector<double> best(n, 0.0), candidate;
  double best_value = 0.0;
  int outer = 0;
  for (; n > 0 && outer < config.max_outer; ++outer) {
    const auto inner = block_descent(p, by_job, by_unit, m, x,
                                     std::min(eta, config.eta_final),
                                     config.max_inner);
    candidate = x;
    repair(p, candidate);
    if (const double w = welfare_at(p, candidate); w > best_value) {
      best_value = w;
      best = candidate;
    }

    sums(p, x, per_job, per_unit);
    double v = 0.0;
    for (std::size_t j = 0; j < jobs; ++j)
      v += std::abs(std::max(per_job[j] - p.workload[j], -m.mu[j] / m.sigma));
    for (std::size_t r = 0; r < rows; ++r)
      v += std::abs(std::max(per_unit[r] - p.capacity[r], -m.lambda[r] / m.sigma));

    if (v <= eps) {
      if (inner.mapping_norm <= config.eta_final && v <= config.eps_final) {
        out.converged = true;
        break;
      }
      for (std::size_t j = 0; j < jobs; ++j)
        m.mu[j] = std::max(m.mu[j] + m.sigma * (per_job[j] - p.workload[j]), 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        m.lambda[r] =
            std::max(m.lambda[r] + m.sigma * (per_unit[r] - p.capacity[r]), 0.0);
      eta /= m.sigma;
      eps /= std::pow(m.sigma, config.theta2);
    } else if (m.sigma < kMaxPenalty) {
      m.sigma *= config.growth;
      eta = 1.0 / m.sigma;
      eps = 1.0 / std::pow(m.sigma, config.theta1);
    }
  }
  if (n == 0) out.converged = true;
  out.iterations = outer;
  // The final iterate once converged; otherwise the best one seen.
  candidate = x;
  repair(p, candidate);
  out.x = (out.converged || welfare_at(p, candidate) >= best_value) ? candidate
                                                                    : best;
  return out;
}

// Log-barrier interior point on the joint program. Each Newton system is
// D + A^T W A with D diagonal and A the 0/1 incidence of variables in job and
// unit rows, so it is solved through the (jobs + units)-sized Woodbury
// system. Redundant rows (their caps already sum below the bound) and
// variables with a zero cap are left out.
JointResult solve_barrier(const JointProblem& p) {
  const std::size_t n = p.size();
  JointResult out;
  out.x.assign(n, 0.0);

  std::vector<std::size_t> vars;
  for (std::size_t v = 0; v < n; ++v)
    if (p.cap[v] > 0.0) vars.push_back(v);
  const std::size_t k = vars.size();
  if (k == 0) {
    out.converged = true;
    return out;
  }

  // Rows: kept job budgets first, then kept unit capacities.
  std::vector<double> cap_sum_job(p.workload.size(), 0.0);
  std::vector<double> cap_sum_unit(p.capacity.size(), 0.0);
  std::vector<int> count_job(p.workload.size(), 0), count_unit(p.capacity.size(), 0);
  for (std::size_t v : vars) {
    cap_sum_job[p.job_of[v]] += p.cap[v];
    cap_sum_unit[p.row_of[v]] += p.cap[v];
    ++count_job[p.job_of[v]];
    ++count_unit[p.row_of[v]];
  }
  std::vector<double> bound;
  std::vector<long> job_row(p.workload.size(), -1), unit_row(p.capacity.size(), -1);
  for (std::size_t j = 0; j < p.workload.size(); ++j)
    if (cap_sum_job[j] > p.workload[j]) {
      job_row[j] = static_cast<long>(bound.size());
      bound.push_back(p.workload[j]);
    }
  for (std::size_t r = 0; r < p.capacity.size(); ++r)
    if (cap_sum_unit[r] > p.capacity[r]) {
      unit_row[r] = static_cast<long>(bound.size());
      bound.push_back(p.capacity[r]);
    }
  const std::size_t m = bound.size();
  // Up to two rows per variable.
  std::vector<std::array<long, 2>> rows_of(k);
  for (std::size_t i = 0; i < k; ++i)
    rows_of[i] = {job_row[p.job_of[vars[i]]], unit_row[p.row_of[vars[i]]]};

  // Strictly feasible start.
  Eigen::VectorXd x(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t v = vars[i];
    const int j = p.job_of[v];
    const std::size_t r = p.row_of[v];
    x[i] = 0.5 * std::min({p.cap[v], p.workload[j] / count_job[j],
                           p.capacity[r] / count_unit[r]});
  }

  auto row_slack = [&](const Eigen::VectorXd& xs, Eigen::VectorXd& slack) {
    slack = Eigen::Map<const Eigen::VectorXd>(bound.data(), m);
    for (std::size_t i = 0; i < k; ++i)
      for (long row : rows_of[i])
        if (row >= 0) slack[row] -= xs[i];
  };
  auto welfare = [&](const Eigen::VectorXd& xs) {
    double w = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t v = vars[i];
      w += p.utility[p.job_of[v]].value(xs[i]) + p.slope[v] * xs[i];
    }
    return w;
  };
  // Change of the barrier objective from xs to ys, summed term by term so
  // that small decreases survive at large t. +inf outside the interior.
  auto objective_change = [&](const Eigen::VectorXd& xs,
                              const Eigen::VectorXd& ys, double t) {
    Eigen::VectorXd sx, sy;
    row_slack(xs, sx);
    row_slack(ys, sy);
    double gain = 0.0, b = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t v = vars[i];
      const double hy = p.cap[v] - ys[i];
      if (!(ys[i] > 0.0 && hy > 0.0)) return kInfiniteCost;
      const double d = ys[i] - xs[i];
      const UtilitySpec& u = p.utility[p.job_of[v]];
      switch (u.family) {
        case UtilityFamily::kLinear: gain += u.coeff * d; break;
        case UtilityFamily::kLog: gain += u.coeff * std::log1p(d / (1.0 + xs[i])); break;
        case UtilityFamily::kPoly:
          gain += u.coeff * d / (std::sqrt(ys[i]) + std::sqrt(xs[i]));
          break;
      }
      gain += p.slope[v] * d;
      b -= std::log1p(d / xs[i]) + std::log1p(-d / (p.cap[v] - xs[i]));
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (!(sy[r] > 0.0)) return kInfiniteCost;
      b -= std::log1p((sy[r] - sx[r]) / sx[r]);
    }
    return -t * gain + b;
  };

  const double barrier_terms = static_cast<double>(2 * k + m);
  double t = 1.0;
  Eigen::VectorXd grad(k), diag(k), dx(k), slack, inv_d(k), trial(k);
  Eigen::VectorXd drow(m), residual(k), correction(k);
  Eigen::MatrixXd schur(m, m);
  Eigen::VectorXd rhs(m);
  int newton = 0;
  for (int stage = 0; stage < 60; ++stage) {
    for (int it = 0; it < 200; ++it, ++newton) {
      row_slack(x, slack);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t v = vars[i];
        const UtilitySpec& u = p.utility[p.job_of[v]];
        const double hi = p.cap[v] - x[i];
        double d1 = 0.0, d2 = 0.0;  // exact f' and f''
        switch (u.family) {
          case UtilityFamily::kLinear: d1 = u.coeff; break;
          case UtilityFamily::kLog:
            d1 = u.coeff / (1.0 + x[i]);
            d2 = -d1 / (1.0 + x[i]);
            break;
          case UtilityFamily::kPoly:
            d1 = u.coeff / (2.0 * std::sqrt(x[i]));
            d2 = -d1 / (2.0 * x[i]);
            break;
        }
        grad[i] = -t * (d1 + p.slope[v]) - 1.0 / x[i] + 1.0 / hi;
        diag[i] = -t * d2 + 1.0 / (x[i] * x[i]) + 1.0 / (hi * hi);
        for (long row : rows_of[i])
          if (row >= 0) grad[i] += 1.0 / slack[row];
      }
      // Newton direction via Woodbury: (D + A^T W A)^{-1}.
      inv_d = diag.cwiseInverse();
      schur.setZero();
      for (std::size_t r = 0; r < m; ++r) schur(r, r) = slack[r] * slack[r];
      for (std::size_t i = 0; i < k; ++i) {
        const auto [a, b] = rows_of[i];
        if (a >= 0) schur(a, a) += inv_d[i];
        if (b >= 0) schur(b, b) += inv_d[i];
        if (a >= 0 && b >= 0) {
          schur(a, b) += inv_d[i];
          schur(b, a) += inv_d[i];
        }
      }
      const Eigen::LDLT<Eigen::MatrixXd> factor(schur);
      auto row_sum = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out_rows) {
        out_rows.setZero(m);
        for (std::size_t i = 0; i < k; ++i)
          for (long row : rows_of[i])
            if (row >= 0) out_rows[row] += v[i];
      };
      // Approximate H^{-1} r through the factored m x m system.
      auto apply_inverse = [&](const Eigen::VectorXd& r, Eigen::VectorXd& out_x) {
        out_x = inv_d.cwiseProduct(r);
        if (m == 0) return;
        row_sum(out_x, rhs);
        const Eigen::VectorXd z = factor.solve(rhs);
        for (std::size_t i = 0; i < k; ++i) {
          double back = 0.0;
          for (long row : rows_of[i])
            if (row >= 0) back += z[row];
          out_x[i] -= inv_d[i] * back;
        }
      };
      apply_inverse(-grad, dx);
      // A few rounds of refinement against H itself; the reduced system is
      // badly conditioned once row slacks get small.
      for (int round = 0; round < 3 && m > 0; ++round) {
        row_sum(dx, drow);
        for (std::size_t r = 0; r < m; ++r) drow[r] /= slack[r] * slack[r];
        residual = -grad - diag.cwiseProduct(dx);
        for (std::size_t i = 0; i < k; ++i)
          for (long row : rows_of[i])
            if (row >= 0) residual[i] -= drow[row];
        apply_inverse(residual, correction);
        dx += correction;
      }
      const double decrement = -grad.dot(dx);
      if (!(decrement > 1e-12)) break;

      // Largest step that stays strictly inside, then backtracking.
      double step = 1.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (dx[i] < 0.0) step = std::min(step, -0.99 * x[i] / dx[i]);
        if (dx[i] > 0.0) step = std::min(step, 0.99 * (p.cap[vars[i]] - x[i]) / dx[i]);
      }
      row_sum(dx, drow);
      for (std::size_t r = 0; r < m; ++r)
        if (drow[r] > 0.0) step = std::min(step, 0.99 * slack[r] / drow[r]);
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
        trial = x + step * dx;
        if (objective_change(x, trial, t) <= -0.25 * step * decrement) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      x = trial;
      if (decrement < 1e-9) break;
    }
    const double w = welfare(x);
    if (barrier_terms / t <= kBarrierGap * std::max(1.0, std::abs(w))) {
      out.converged = true;
      break;
    }
    t *= 10.0;
  }
  out.iterations = newton;
  for (std::size_t i = 0; i < k; ++i) out.x[vars[i]] = x[i];
  repair(p, out.x);
  return out;
}

}  // namespace

std::string_view to_string(OfflineMethod method) {
  switch (method) {
    case OfflineMethod::kInteriorPoint: return "interior_point";
    case OfflineMethod::kAugmentedLagrangian: return "augmented_lagrangian";
  }
  return "unknown";
}

OfflineMethod parse_offline_method(std::string_view name) {
  for (OfflineMethod m :
       {OfflineMethod::kInteriorPoint, OfflineMethod::kAugmentedLagrangian})
    if (to_string(m) == name) return m;
  throw Error("unknown offline method '" + std::string(name) + "'");
}

OfflineSolution offline_optimum(const Scenario& scenario,
                                const SolverConfig& config,
                                OfflineMethod method) {
  config.validate();
  const JointProblem p = flatten(scenario);
  const JointResult r = method == OfflineMethod::kInteriorPoint
                            ? solve_barrier(p)
                            : solve_alm(p, config);
  OfflineSolution out;
  out.converged = r.converged;
  out.outer_iterations = r.iterations;
  const std::size_t jobs = scenario.jobs.size();
  out.allocation.resize(jobs);
  for (std::size_t j = 0; j < jobs; ++j)
    for (UnitId u : available_units(scenario.jobs[j], scenario.mesh))
      out.allocation[j][u] = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v)
    out.allocation[p.job_of[v]][p.unit_of[v]] = r.x[v];
  for (std::size_t j = 0; j < jobs; ++j) {
    out.welfare_jobs += job_utility(scenario.jobs[j], out.allocation[j]);
    out.welfare_cluster +=
        cluster_utility(scenario.jobs[j], scenario.mesh, out.allocation[j]);
  }
  out.welfare = out.welfare_jobs + out.welfare_cluster;
  return out;
}

double brute_force_optimum(const Scenario& scenario, double grid_step) {
  if (!(grid_step > 0.0)) throw Error("grid step must be > 0");
  const JointProblem p = flatten(scenario);
  const std::size_t n = p.size();
  if (n > kBruteForceMaxDim)
    throw Error("brute force: " + std::to_string(n) +
                " decision variables exceed the limit of " +
                std::to_string(kBruteForceMaxDim));
  std::vector<int> steps(n);
  double points = 1.0;
  for (std::size_t v = 0; v < n; ++v) {
    steps[v] = static_cast<int>(std::floor(p.cap[v] / grid_step + 1e-9));
    points *= steps[v] + 1.0;
  }
  if (points > 5e8) throw Error("brute force: grid too large");

  std::vector<double> per_job(p.workload.size(), 0.0);
  std::vector<double> per_unit(p.capacity.size(), 0.0);
  constexpr double kSlack = 1e-12;
  double best = 0.0;
  std::function<void(std::size_t, double)> visit = [&](std::size_t v,
                                                       double acc) {
    if (v == n) {
      best = std::max(best, acc);
      return;
    }
    const UtilitySpec& u = p.utility[p.job_of[v]];
    const int j = p.job_of[v];
    const std::size_t r = p.row_of[v];
    for (int k = 0; k <= steps[v]; ++k) {
      const double xv = k * grid_step;
      // Sums only grow with k, so the first violation ends this coordinate.
      if (per_job[j] + xv > p.workload[j] * (1 + kSlack) + kSlack) break;
      if (per_unit[r] + xv > p.capacity[r] * (1 + kSlack) + kSlack) break;
      per_job[j] += xv;
      per_unit[r] += xv;
      visit(v + 1, acc + u.value(xv) + p.slope[v] * xv);
      per_job[j] -= xv;
      per_unit[r] -= xv;
    }
  };
  visit(0, 0.0);
  return best;
}

RatioReport competitive_ratio(const std::vector<Scenario>& scenarios,
                              const SolverConfig& config,
                              const SolverConfig& offline, int threads,
                              Policy policy, OfflineMethod method) {
  if (scenarios.empty()) throw Error("competitive ratio: no scenarios");
  RatioReport report;
  report.per_scenario.resize(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  detail::parallel_for(
      scenarios.size(), threads > 0 ? threads : default_thread_count(),
      [&](std::size_t i) {
        try {
          const Scenario& s = scenarios[i];
          RatioEntry& e = report.per_scenario[i];
          e.seed = s.seed;
          const OfflineSolution opt = offline_optimum(s, offline, method);
          const DispatchTrace trace = run_policy(s, policy, config);
          e.theta_star = opt.welfare;
          e.theta_on = trace.welfare_total;
          e.alpha_hat = trace.alpha;
          e.offline_converged = opt.converged;
          if (e.theta_on <= 0.0) {
            e.infinite = e.theta_star > 0.0;
            e.ratio = e.infinite ? std::numeric_limits<double>::infinity() : 1.0;
          } else {
            e.ratio = e.theta_star / e.theta_on;
          }
        } catch (const std::exception& ex) {
          errors[i] = ex.what();
        }
      });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw Error("scenario " + std::to_string(i) + ": " + errors[i]);

  const RatioEntry* worst = &report.per_scenario.front();
  for (const RatioEntry& e : report.per_scenario) {
    report.any_infinite |= e.infinite;
    if (e.ratio > worst->ratio) worst = &e;
  }
  report.theta_star = worst->theta_star;
  report.theta_on = worst->theta_on;
  report.ratio = worst->ratio;
  report.alpha_hat = worst->alpha_hat;
  return report;
}

}  // namespace meshdispatch
