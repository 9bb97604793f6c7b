#include "meshdispatch/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "meshdispatch/scenario_io.h"
#include "parallel.h"

namespace meshdispatch {

using nlohmann::json;

void GenParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error("generator params: " + what);
  };
  if (nodes <= 0 || slots <= 0) fail("nodes and slots must be > 0");
  if (!(slot_minutes > 0.0)) fail("slot_minutes must be > 0");
  if (job_count < 0) fail("job_count must be >= 0");
  if (!(arrival_rate > 0.0)) fail("arrival_rate must be > 0");
  if (!(duration_mean_slots > 0.0)) fail("duration mean must be > 0");
  if (!(capacity_mu > 0.0 && workload_mu > 0.0 && cap_mu > 0.0))
    fail("means must be > 0");
  if (capacity_sigma < 0.0 || workload_sigma < 0.0 || cap_sigma < 0.0)
    fail("standard deviations must be >= 0");
  if (!(coeff_min > 0.0 && coeff_min <= coeff_max)) fail("bad coefficient range");
  if (!(beta_min > 0.0 && beta_min <= beta_max)) fail("bad beta range");
  if (!(locality > 0.0 && locality <= 1.0)) fail("locality must lie in (0, 1]");
}

namespace {

constexpr double kWorkloadFloor = 0.5;
constexpr double kCapFloor = 0.1;
constexpr double kCapacityFloor = 1.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(std::mt19937_64& rng, double mu, double sigma) {
  if (sigma == 0.0) return mu;
  return std::normal_distribution<double>(mu, sigma)(rng);
}

}  // namespace

Scenario generate_scenario(const GenParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  const double tau = p.slot_minutes;
  const double horizon = p.slots * tau;

  std::vector<double> capacities(static_cast<std::size_t>(p.nodes) * p.slots);
  for (double& c : capacities)
    c = std::max(normal(rng, p.capacity_mu, p.capacity_sigma), kCapacityFloor);
  Scenario s;
  s.mesh = build_mesh(p.nodes, p.slots, tau, capacities);
  s.seed = static_cast<long long>(p.seed);
  const double min_capacity =
      *std::min_element(capacities.begin(), capacities.end());

  // Per-slot Poisson counts, then truncate or pad to exactly job_count.
  std::vector<double> arrivals;
  std::poisson_distribution<int> per_slot(p.arrival_rate);
  for (int t = 0; t < p.slots; ++t) {
    const int count = per_slot(rng);
    for (int i = 0; i < count; ++i) arrivals.push_back(t * tau + uniform(rng, 0.0, tau));
  }
  std::sort(arrivals.begin(), arrivals.end());
  if (arrivals.size() > static_cast<std::size_t>(p.job_count))
    arrivals.resize(p.job_count);
  std::uniform_int_distribution<int> any_slot(0, p.slots - 1);
  while (arrivals.size() < static_cast<std::size_t>(p.job_count))
    arrivals.push_back(any_slot(rng) * tau + uniform(rng, 0.0, tau));
  std::sort(arrivals.begin(), arrivals.end());

  std::exponential_distribution<double> duration(1.0 /
                                                 (p.duration_mean_slots * tau));
  const double shared = uniform(rng, p.coeff_min, p.coeff_max);
  for (int n = 0; n < p.job_count; ++n) {
    Job job;
    job.id = n;
    job.arrival_minutes = arrivals[n];
    const double d = std::max(duration(rng), 1e-9 * tau);
    job.deadline_minutes = std::min(job.arrival_minutes + d, horizon);
    job.workload = std::max(normal(rng, p.workload_mu, p.workload_sigma),
                            kWorkloadFloor);
    if (p.non_partitionable) job.workload = std::min(job.workload, min_capacity);
    job.utility.family = p.utility_family;
    const double own = uniform(rng, p.coeff_min, p.coeff_max);
    job.utility.coeff = p.shared_coeff ? shared : own;

    for (int k = 0; k < p.nodes; ++k)
      if (p.locality >= 1.0 || uniform(rng, 0.0, 1.0) < p.locality)
        job.eligible_nodes.push_back(k);
    if (job.eligible_nodes.empty())
      job.eligible_nodes.push_back(std::uniform_int_distribution<int>(
          0, p.nodes - 1)(rng));

    std::map<int, double> node_cap, node_beta;
    for (int k : job.eligible_nodes) {
      node_cap[k] = std::max(normal(rng, p.cap_mu, p.cap_sigma), kCapFloor);
      node_beta[k] = uniform(rng, p.beta_min, p.beta_max);
    }
    for (UnitId u : available_units(job, s.mesh)) {
      const double cap = p.non_partitionable ? job.workload : node_cap[u.node];
      job.per_unit_cap[u] = std::min(cap, s.mesh.capacity(u));
      job.cluster_weight[u] = node_beta[u.node];
    }
    s.jobs.push_back(std::move(job));
  }
  return s;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kDuration: return "duration";
    case SweepAxis::kWorkload: return "workload";
    case SweepAxis::kCongestion: return "congestion";
  }
  return "unknown";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a :
       {SweepAxis::kDuration, SweepAxis::kWorkload, SweepAxis::kCongestion})
    if (to_string(a) == name) return a;
  throw Error("unknown sweep axis '" + std::string(name) + "'");
}

GenParams apply_sweep(GenParams base, SweepAxis axis, double value) {
  if (!(value > 0.0)) throw Error("sweep values must be > 0");
  switch (axis) {
    case SweepAxis::kDuration: base.duration_mean_slots = value; break;
    case SweepAxis::kWorkload: base.workload_mu = value; break;
    case SweepAxis::kCongestion:
      base.workload_mu *= value;
      base.capacity_mu /= value;
      break;
  }
  return base;
}

namespace {

json params_to_json(const GenParams& p) {
  return {{"nodes", p.nodes},
          {"slots", p.slots},
          {"slot_minutes", p.slot_minutes},
          {"job_count", p.job_count},
          {"arrival_rate", p.arrival_rate},
          {"duration_mean_slots", p.duration_mean_slots},
          {"capacity_mu", p.capacity_mu},
          {"capacity_sigma", p.capacity_sigma},
          {"workload_mu", p.workload_mu},
          {"workload_sigma", p.workload_sigma},
          {"cap_mu", p.cap_mu},
          {"cap_sigma", p.cap_sigma},
          {"utility_family", std::string(to_string(p.utility_family))},
          {"coeff_range", {p.coeff_min, p.coeff_max}},
          {"shared_coeff", p.shared_coeff},
          {"beta_range", {p.beta_min, p.beta_max}},
          {"locality", p.locality},
          {"non_partitionable", p.non_partitionable}};
}

json solver_to_json(const SolverConfig& c) {
  return {{"sigma0", c.sigma0},         {"growth", c.growth},
          {"theta1", c.theta1},         {"theta2", c.theta2},
          {"eta", c.eta_final},         {"eps", c.eps_final},
          {"learning_rate", c.learning_rate}, {"decay", c.decay},
          {"max_outer", c.max_outer},   {"max_inner", c.max_inner}};
}

}  // namespace

std::vector<PointSummary> summarize(const std::vector<ExperimentRow>& rows) {
  // Keyed by (sweep value, policy) in first-seen order.
  std::vector<PointSummary> out;
  std::vector<std::vector<double>> samples;
  for (const ExperimentRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const PointSummary& s) {
      return s.sweep_value == r.sweep_value && s.policy == r.policy;
    });
    std::size_t idx = static_cast<std::size_t>(it - out.begin());
    if (it == out.end()) {
      out.push_back({r.sweep_value, r.policy, 0, 0.0, 0.0});
      samples.emplace_back();
    }
    if (r.error.empty()) samples[idx].push_back(r.welfare_total);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = samples[i];
    out[i].runs = static_cast<int>(v.size());
    if (v.empty()) continue;
    double mean = 0.0;
    for (double w : v) mean += w;
    mean /= v.size();
    double var = 0.0;
    for (double w : v) var += (w - mean) * (w - mean);
    out[i].mean = mean;
    out[i].std_error =
        v.size() > 1 ? std::sqrt(var / (v.size() - 1) / v.size()) : 0.0;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.base.validate();
  config.solver.validate();
  for (double v : config.points) apply_sweep(config.base, config.axis, v);

  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_pol = config.policies.size();
  const std::size_t cells = config.points.size() * n_seeds;
  ExperimentResult result;
  result.rows.resize(cells * n_pol);

  // One cell = one (point, seed) scenario shared by every policy.
  auto run_cell = [&](std::size_t cell) {
    const double value = config.points[cell / n_seeds];
    const std::uint64_t seed = config.seeds[cell % n_seeds];
    Scenario scenario;
    std::string gen_error;
    try {
      GenParams params = apply_sweep(config.base, config.axis, value);
      params.seed = seed;
      scenario = generate_scenario(params);
    } catch (const std::exception& e) {
      gen_error = e.what();
    }
    for (std::size_t k = 0; k < n_pol; ++k) {
      ExperimentRow& row = result.rows[cell * n_pol + k];
      row.sweep_var = std::string(to_string(config.axis));
      row.sweep_value = value;
      row.policy = std::string(to_string(config.policies[k]));
      row.seed = seed;
      if (!gen_error.empty()) {
        row.error = gen_error;
        continue;
      }
      try {
        const DispatchTrace t =
            run_policy(scenario, config.policies[k], config.solver);
        row.welfare_jobs = t.welfare_jobs;
        row.welfare_cluster = t.welfare_cluster;
        row.welfare_total = t.welfare_total;
        row.rejected = t.rejected_count();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  detail::parallel_for(
      cells, config.threads > 0 ? config.threads : default_thread_count(),
      run_cell);

  result.summary = summarize(result.rows);
  json meta;
  meta["version"] = kVersion;
  meta["axis"] = std::string(to_string(config.axis));
  meta["points"] = config.points;
  meta["seeds"] = config.seeds;
  std::vector<std::string> names;
  for (Policy p : config.policies) names.emplace_back(to_string(p));
  meta["policies"] = names;
  meta["generator"] = params_to_json(config.base);
  meta["solver"] = solver_to_json(config.solver);
  result.metadata = meta.dump();
  return result;
}

ExportFormat parse_format(std::string_view name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  throw Error("unknown format '" + std::string(name) + "'");
}

void export_results(const ExperimentResult& result, ExportFormat format,
                    const std::filesystem::path& path) {
  std::ostringstream out;
  if (format == ExportFormat::kCsv) {
    out << "sweep_var,sweep_value,policy,seed,welfare_jobs,welfare_cluster,"
           "welfare_total,rejected\n";
    for (const ExperimentRow& r : result.rows) {
      out << r.sweep_var << ',' << format_real(r.sweep_value) << ',' << r.policy
          << ',' << r.seed << ',';
      if (r.error.empty())
        out << format_real(r.welfare_jobs) << ','
            << format_real(r.welfare_cluster) << ','
            << format_real(r.welfare_total) << ',' << r.rejected << '\n';
      else
        out << ",,,\n";
    }
  } else {
    json doc;
    doc["metadata"] =
        result.metadata.empty() ? json::object() : json::parse(result.metadata);
    json rows = json::array();
    for (const ExperimentRow& r : result.rows) {
      json j = {{"sweep_var", r.sweep_var},
                {"sweep_value", r.sweep_value},
                {"policy", r.policy},
                {"seed", r.seed},
                {"welfare_jobs", r.welfare_jobs},
                {"welfare_cluster", r.welfare_cluster},
                {"welfare_total", r.welfare_total},
                {"rejected", r.rejected}};
      if (!r.error.empty()) j["error"] = r.error;
      rows.push_back(std::move(j));
    }
    doc["rows"] = std::move(rows);
    json summary = json::array();
    for (const PointSummary& s : result.summary)
      summary.push_back({{"sweep_value", s.sweep_value},
                         {"policy", s.policy},
                         {"runs", s.runs},
                         {"mean", s.mean},
                         {"std_error", s.std_error}});
    doc["summary"] = std::move(summary);
    out << doc.dump(2) << '\n';
  }
  write_text_file(path, out.str());
}

ExperimentResult read_results_json(const std::filesystem::path& path) {
  ExperimentResult result;
  try {
    const json doc = json::parse(read_text_file(path));
    result.metadata = doc.at("metadata").dump();
    for (const json& j : doc.at("rows")) {
      ExperimentRow r;
      r.sweep_var = j.at("sweep_var").get<std::string>();
      r.sweep_value = j.at("sweep_value").get<double>();
      r.policy = j.at("policy").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.welfare_jobs = j.at("welfare_jobs").get<double>();
      r.welfare_cluster = j.at("welfare_cluster").get<double>();
      r.welfare_total = j.at("welfare_total").get<double>();
      r.rejected = j.at("rejected").get<int>();
      r.error = j.value("error", "");
      result.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  result.summary = summarize(result.rows);
  return result;
}

}  // namespace meshdispatch
