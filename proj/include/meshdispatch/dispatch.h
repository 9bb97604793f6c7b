#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "meshdispatch/solver.h"

namespace meshdispatch {

enum class Policy { kOnSocMax, kOnSocMaxIntegral, kMaxFirst, kEqualShare };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view name);

// An allocation counts as accepted when it dispatches more than this in total.
inline constexpr double kAcceptThreshold = 1e-9;

// Utilization of every unit plus the pricing curves, shared by all policies.
class OnlineState {
 public:
  OnlineState(ResourceMesh mesh, WelfareBounds bounds);

  const ResourceMesh& mesh() const { return mesh_; }
  const WelfareBounds& bounds() const { return bounds_; }
  double alpha() const { return alpha_; }
  double omega(UnitId unit) const { return omega_[mesh_.index(unit)]; }
  const std::vector<double>& omega() const { return omega_; }
  const PricingCurve& curve(UnitId unit) const {
    return curves_[mesh_.index(unit)];
  }
  // min(job cap, C_r - omega_r), never negative.
  double residual_cap(const Job& job, UnitId unit) const;

  // omega_r += x_r for every unit of the allocation.
  void apply(const Allocation& allocation);

  std::size_t job_cursor = 0;

 private:
  ResourceMesh mesh_;
  WelfareBounds bounds_;
  double alpha_ = 2.0;
  std::vector<double> omega_;
  std::vector<PricingCurve> curves_;
};

// The per-arrival problem at the current utilization.
PseudoWelfareProblem make_problem(const OnlineState& state, const Job& job);

// Each *_arrival decides one job from the current state only, then commits the
// allocation to the state.
Allocation onsocmax_arrival(OnlineState& state, const Job& job,
                            const SolverConfig& config);
// Non-partitionable workloads: all of the job on at most one unit.
Allocation integral_mode_arrival(OnlineState& state, const Job& job);
Allocation max_first_arrival(OnlineState& state, const Job& job);
Allocation equal_share_arrival(OnlineState& state, const Job& job);

struct JobOutcome {
  int job_id = 0;
  Allocation allocation;
  bool accepted = false;
  double f_value = 0.0;
  double g_value = 0.0;
};

struct DispatchTrace {
  Policy policy = Policy::kOnSocMax;
  std::vector<JobOutcome> per_job;
  std::vector<double> final_omega;  // indexed like ResourceMesh::index
  double welfare_jobs = 0.0;
  double welfare_cluster = 0.0;
  double welfare_total = 0.0;
  double alpha = 2.0;
  WelfareBounds bounds;

  int rejected_count() const;
  int unconverged_count() const;
};

// Violations of the integral-mode precondition (job cap == workload).
std::vector<std::string> validate_integral_scenario(const Scenario& scenario);

// Runs the policy over the jobs in arrival order. Bounds default to the
// scenario-wide welfare bounds. Solver non-convergence is recorded per job.
DispatchTrace run_policy(const Scenario& scenario, Policy policy,
                         const SolverConfig& config,
                         std::optional<WelfareBounds> bounds = std::nullopt);

// Bounds used when none are supplied: welfare_bounds(scenario), or {1, 1}
// when no job has an available unit.
WelfareBounds default_bounds(const Scenario& scenario);

}  // namespace meshdispatch
