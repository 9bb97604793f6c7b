#include "meshdispatch/dispatch.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meshdispatch {

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kOnSocMax: return "onsocmax";
    case Policy::kOnSocMaxIntegral: return "onsocmax_integral";
    case Policy::kMaxFirst: return "max_first";
    case Policy::kEqualShare: return "equal_share";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  for (Policy p : {Policy::kOnSocMax, Policy::kOnSocMaxIntegral,
                   Policy::kMaxFirst, Policy::kEqualShare})
    if (to_string(p) == name) return p;
  throw Error("unknown policy '" + std::string(name) + "'");
}

OnlineState::OnlineState(ResourceMesh mesh, WelfareBounds bounds)
    : mesh_(std::move(mesh)), bounds_(bounds) {
  alpha_ = solve_alpha(bounds_.ratio()).alpha;
  omega_.assign(mesh_.unit_count(), 0.0);
  curves_.reserve(mesh_.unit_count());
  for (double c : mesh_.capacities()) curves_.emplace_back(c, bounds_, alpha_);
}

double OnlineState::residual_cap(const Job& job, UnitId unit) const {
  const double free = mesh_.capacity(unit) - omega(unit);
  return std::max(std::min(job.per_unit_cap.at(unit), free), 0.0);
}

void OnlineState::apply(const Allocation& allocation) {
  for (std::size_t i = 0; i < allocation.units.size(); ++i) {
    const std::size_t idx = mesh_.index(allocation.units[i]);
    omega_[idx] = std::min(omega_[idx] + allocation.x[i], mesh_.capacities()[idx]);
  }
}

PseudoWelfareProblem make_problem(const OnlineState& state, const Job& job) {
  PseudoWelfareProblem p;
  p.workload = job.workload;
  p.utility = job.utility;
  p.units = available_units(job, state.mesh());
  for (UnitId u : p.units) {
    p.slope.push_back(job.cluster_weight.at(u) / state.mesh().capacity(u));
    p.omega.push_back(state.omega(u));
    p.cap.push_back(state.residual_cap(job, u));
    p.curves.push_back(state.curve(u));
  }
  return p;
}

namespace {

Allocation zero_allocation(std::vector<UnitId> units) {
  Allocation a;
  a.x.assign(units.size(), 0.0);
  a.units = std::move(units);
  return a;
}

// Fills welfare and cost for an allocation built outside the solver.
void account(const OnlineState& state, const Job& job, Allocation& a) {
  a.welfare = 0.0;
  a.cost_paid = 0.0;
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    const UnitId u = a.units[i];
    const double slope = job.cluster_weight.at(u) / state.mesh().capacity(u);
    a.welfare += job.utility.value(a.x[i]) + slope * a.x[i];
    a.cost_paid += state.curve(u).cost_integral(state.omega(u), a.x[i]);
  }
}

}  // namespace

Allocation onsocmax_arrival(OnlineState& state, const Job& job,
                            const SolverConfig& config) {
  const PseudoWelfareProblem problem = make_problem(state, job);
  if (problem.size() == 0) return zero_allocation({});
  Allocation a = solve_pseudo_welfare(problem, config);
  state.apply(a);
  return a;
}

Allocation integral_mode_arrival(OnlineState& state, const Job& job) {
  Allocation a = zero_allocation(available_units(job, state.mesh()));
  const double load = job.workload;
  double best_score = 0.0;
  std::size_t best = a.units.size();
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    const UnitId u = a.units[i];
    const double capacity = state.mesh().capacity(u);
    if (capacity - state.omega(u) < load) continue;
    const double slope = job.cluster_weight.at(u) / capacity;
    const double score =
        job.utility.value(load) + slope * load -
        state.curve(u).marginal_cost(state.omega(u) + load) * load;
    if (score > best_score) {  // strict: earlier canonical unit wins ties
      best_score = score;
      best = i;
    }
  }
  if (best < a.units.size()) a.x[best] = load;
  account(state, job, a);
  state.apply(a);
  return a;
}

Allocation max_first_arrival(OnlineState& state, const Job& job) {
  Allocation a = zero_allocation(available_units(job, state.mesh()));
  const std::size_t n = a.units.size();
  std::vector<double> cap(n), slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    cap[i] = state.residual_cap(job, a.units[i]);
    slope[i] = job.cluster_weight.at(a.units[i]) /
               state.mesh().capacity(a.units[i]);
  }
  const double budget = job.workload;
  const double total_cap = std::accumulate(cap.begin(), cap.end(), 0.0);

  if (total_cap <= budget) {
    a.x = cap;
  } else if (job.utility.family == UtilityFamily::kLinear) {
    // Constant marginals: pour into the best units in order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) {
                       return slope[l] > slope[r];
                     });
    double left = budget;
    for (std::size_t i : order) {
      if (left <= 0.0) break;
      a.x[i] = std::min(cap[i], left);
      left -= a.x[i];
    }
  } else {
    // Water level lambda: x_i = clamp(inverse marginal at lambda, 0, cap_i);
    // the dispatched total is non-increasing in lambda.
    auto fill = [&](double lambda, std::vector<double>& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::clamp(job.utility.marginal_inverse(lambda, slope[i]), 0.0,
                          cap[i]);
        s += x[i];
      }
      return s;
    };
    std::vector<double> x(n);
    // Breakpoints: unit i sits at its cap for every level up to
    // marginal(cap_i) + slope_i, so the smallest of these still fills every
    // cap and brackets the level from below.
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (cap[i] > 0.0)
        lo = std::min(lo, job.utility.marginal(cap[i]) + slope[i]);
    double hi = 2.0 * lo;
    while (fill(hi, x) > budget) hi *= 2.0;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (fill(mid, x) > budget ? lo : hi) = mid;
    }
    fill(hi, a.x);
  }
  account(state, job, a);
  state.apply(a);
  return a;
}

Allocation equal_share_arrival(OnlineState& state, const Job& job) {
  Allocation a = zero_allocation(available_units(job, state.mesh()));
  const std::size_t n = a.units.size();
  std::vector<double> cap(n);
  std::vector<bool> open(n, true);
  for (std::size_t i = 0; i < n; ++i)
    cap[i] = state.residual_cap(job, a.units[i]);

  double left = job.workload;
  std::size_t open_count = n;
  // Each round either settles every open unit or closes at least one, so the
  // loop runs at most n + 1 times.
  while (open_count > 0 && left > 0.0) {
    const double share = left / static_cast<double>(open_count);
    bool clamped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (open[i] && cap[i] - a.x[i] <= share) {
        left -= cap[i] - a.x[i];
        a.x[i] = cap[i];
        open[i] = false;
        --open_count;
        clamped = true;
      }
    }
    if (clamped) continue;
    for (std::size_t i = 0; i < n; ++i)
      if (open[i]) a.x[i] += share;
    left = 0.0;
  }
  account(state, job, a);
  state.apply(a);
  return a;
}

int DispatchTrace::rejected_count() const {
  return static_cast<int>(std::count_if(
      per_job.begin(), per_job.end(),
      [](const JobOutcome& o) { return !o.accepted; }));
}

int DispatchTrace::unconverged_count() const {
  return static_cast<int>(std::count_if(
      per_job.begin(), per_job.end(),
      [](const JobOutcome& o) { return !o.allocation.converged; }));
}

std::vector<std::string> validate_integral_scenario(const Scenario& scenario) {
  std::vector<std::string> out;
  for (const Job& job : scenario.jobs) {
    for (const auto& [unit, cap] : job.per_unit_cap) {
      if (std::abs(cap - job.workload) > 1e-9 * std::max(1.0, job.workload))
        out.push_back("job " + std::to_string(job.id) + ": cap at " +
                      to_key(unit) + " differs from the workload");
    }
  }
  return out;
}

WelfareBounds default_bounds(const Scenario& scenario) {
  for (const Job& job : scenario.jobs)
    if (!available_units(job, scenario.mesh).empty())
      return welfare_bounds(scenario);
  return {1.0, 1.0};
}

DispatchTrace run_policy(const Scenario& scenario, Policy policy,
                         const SolverConfig& config,
                         std::optional<WelfareBounds> bounds) {
  if (policy == Policy::kOnSocMaxIntegral) {
    const auto problems = validate_integral_scenario(scenario);
    if (!problems.empty())
      throw Error("integral mode: " + problems.front());
  }
  DispatchTrace trace;
  trace.policy = policy;
  trace.bounds = bounds.value_or(default_bounds(scenario));
  OnlineState state(scenario.mesh, trace.bounds);
  trace.alpha = state.alpha();

  for (const Job& job : scenario.jobs) {
    Allocation a;
    switch (policy) {
      case Policy::kOnSocMax: a = onsocmax_arrival(state, job, config); break;
      case Policy::kOnSocMaxIntegral: a = integral_mode_arrival(state, job); break;
      case Policy::kMaxFirst: a = max_first_arrival(state, job); break;
      case Policy::kEqualShare: a = equal_share_arrival(state, job); break;
    }
    ++state.job_cursor;

    JobOutcome o;
    o.job_id = job.id;
    o.accepted = a.total() > kAcceptThreshold;
    UnitMap x;
    for (std::size_t i = 0; i < a.units.size(); ++i) x[a.units[i]] = a.x[i];
    o.f_value = job_utility(job, x);
    o.g_value = cluster_utility(job, scenario.mesh, x);
    trace.welfare_jobs += o.f_value;
    trace.welfare_cluster += o.g_value;
    o.allocation = std::move(a);
    trace.per_job.push_back(std::move(o));
  }
  trace.welfare_total = trace.welfare_jobs + trace.welfare_cluster;
  trace.final_omega = state.omega();
  return trace;
}

}  // namespace meshdispatch
