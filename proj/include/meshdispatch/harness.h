#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meshdispatch/oracle.h"

namespace meshdispatch {

// Scenario generator parameters. Defaults reproduce the reference setup:
// 10 nodes x 24 one-hour slots, 20 jobs, Poisson(2.03) arrivals per slot,
// exponential durations with a 4-slot mean, capacities N(20, 2), workloads
// N(18, 3), per-node job caps N(7, 1), coefficients U[1, 3], betas
// U[0.1, 0.5].
struct GenParams {
  int nodes = 10;
  int slots = 24;
  double slot_minutes = 60.0;
  int job_count = 20;
  double arrival_rate = 2.03;
  double duration_mean_slots = 4.0;
  double capacity_mu = 20.0;
  double capacity_sigma = 2.0;
  double workload_mu = 18.0;
  double workload_sigma = 3.0;
  double cap_mu = 7.0;
  double cap_sigma = 1.0;
  UtilityFamily utility_family = UtilityFamily::kLinear;
  double coeff_min = 1.0;
  double coeff_max = 3.0;
  // One coefficient draw shared by every job instead of one per job.
  bool shared_coeff = false;
  double beta_min = 0.1;
  double beta_max = 0.5;
  // Probability that a node is eligible for a job; 1 keeps every node.
  double locality = 1.0;
  // Job caps equal the workload (non-partitionable jobs); workloads are then
  // clipped to the smallest unit capacity so the caps stay physical.
  bool non_partitionable = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic in (params, seed). The result passes validate_scenario.
Scenario generate_scenario(const GenParams& params);

enum class SweepAxis { kDuration, kWorkload, kCongestion };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

// Applies one sweep point to the base parameters. Congestion c scales the
// workload mean by c and the capacity mean by 1/c.
GenParams apply_sweep(GenParams base, SweepAxis axis, double value);

struct ExperimentConfig {
  GenParams base;
  SweepAxis axis = SweepAxis::kDuration;
  std::vector<double> points;
  std::vector<std::uint64_t> seeds;
  std::vector<Policy> policies;
  SolverConfig solver = SolverConfig::defaults();
  int threads = 0;  // 0: MESHDISPATCH_THREADS or hardware concurrency
};

struct ExperimentRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string policy;
  std::uint64_t seed = 0;
  double welfare_jobs = 0.0;
  double welfare_cluster = 0.0;
  double welfare_total = 0.0;
  int rejected = 0;
  std::string error;  // non-empty when the run failed

  friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

struct PointSummary {
  double sweep_value = 0.0;
  std::string policy;
  int runs = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;         // canonical order
  std::vector<PointSummary> summary;       // per (point, policy)
  std::string metadata;                    // JSON text: config echo + version
};

// One row per (sweep point, seed, policy); every seed's scenario is shared by
// all policies. Failures are recorded in the row and never abort the sweep.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Aggregates means and standard errors of welfare_total over seeds.
std::vector<PointSummary> summarize(const std::vector<ExperimentRow>& rows);

enum class ExportFormat { kCsv, kJson };

ExportFormat parse_format(std::string_view name);

// Throws Error with the path on I/O failure.
void export_results(const ExperimentResult& result, ExportFormat format,
                    const std::filesystem::path& path);
ExperimentResult read_results_json(const std::filesystem::path& path);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace meshdispatch
