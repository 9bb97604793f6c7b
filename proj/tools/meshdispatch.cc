// meshdispatch command line: scenario generation, single runs, competitive
// ratio reports, the alpha equation and welfare sweeps.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshdispatch/harness.h"
#include "meshdispatch/pricing.h"
#include "meshdispatch/scenario_io.h"

namespace fs = std::filesystem;
using namespace meshdispatch;

namespace {

struct GenFlags {
  GenParams params;
  std::string family = "linear";

  GenParams resolve() const {
    GenParams p = params;
    p.utility_family = parse_family(family);
    p.validate();
    return p;
  }
};

void add_gen_flags(CLI::App* app, GenFlags& g) {
  GenParams& p = g.params;
  app->add_option("--nodes", p.nodes, "Number of nodes")->capture_default_str();
  app->add_option("--slots", p.slots, "Number of time slots")->capture_default_str();
  app->add_option("--slot-minutes", p.slot_minutes)->capture_default_str();
  app->add_option("--jobs", p.job_count, "Jobs per scenario")->capture_default_str();
  app->add_option("--arrival-rate", p.arrival_rate, "Poisson mean per slot")
      ->capture_default_str();
  app->add_option("--duration-mean", p.duration_mean_slots, "Mean duration in slots")
      ->capture_default_str();
  app->add_option("--capacity-mu", p.capacity_mu)->capture_default_str();
  app->add_option("--capacity-sigma", p.capacity_sigma)->capture_default_str();
  app->add_option("--workload-mu", p.workload_mu)->capture_default_str();
  app->add_option("--workload-sigma", p.workload_sigma)->capture_default_str();
  app->add_option("--cap-mu", p.cap_mu)->capture_default_str();
  app->add_option("--cap-sigma", p.cap_sigma)->capture_default_str();
  app->add_option("--family", g.family, "linear | log | poly")->capture_default_str();
  app->add_option("--coeff-min", p.coeff_min)->capture_default_str();
  app->add_option("--coeff-max", p.coeff_max)->capture_default_str();
  app->add_flag("--shared-coeff", p.shared_coeff, "One coefficient for all jobs");
  app->add_option("--beta-min", p.beta_min)->capture_default_str();
  app->add_option("--beta-max", p.beta_max)->capture_default_str();
  app->add_option("--locality", p.locality, "Node eligibility probability")
      ->capture_default_str();
  app->add_flag("--non-partitionable", p.non_partitionable, "Caps equal workloads");
}

struct SolverFlags {
  std::string preset = "default";
  std::string inner;
  SolverConfig values;
  std::vector<std::pair<CLI::Option*, double SolverConfig::*>> reals;
  std::vector<std::pair<CLI::Option*, int SolverConfig::*>> ints;

  SolverConfig resolve() const {
    SolverConfig c;
    if (preset == "published") c = SolverConfig::published();
    else if (preset != "default") throw Error("unknown preset '" + preset + "'");
    for (const auto& [opt, field] : reals)
      if (opt->count() > 0) c.*field = values.*field;
    for (const auto& [opt, field] : ints)
      if (opt->count() > 0) c.*field = values.*field;
    if (!inner.empty()) c.inner = parse_inner_method(inner);
    c.validate();
    return c;
  }
};

void add_solver_flags(CLI::App* app, SolverFlags& s) {
  app->add_option("--preset", s.preset, "default | published")->capture_default_str();
  app->add_option("--inner", s.inner, "Inner minimizer: exact | gradient");
  auto real = [&](const char* name, double SolverConfig::*field) {
    s.reals.emplace_back(app->add_option(name, s.values.*field), field);
  };
  auto integer = [&](const char* name, int SolverConfig::*field) {
    s.ints.emplace_back(app->add_option(name, s.values.*field), field);
  };
  real("--sigma0", &SolverConfig::sigma0);
  real("--growth", &SolverConfig::growth);
  real("--theta1", &SolverConfig::theta1);
  real("--theta2", &SolverConfig::theta2);
  real("--eta", &SolverConfig::eta_final);
  real("--eps", &SolverConfig::eps_final);
  real("--lr", &SolverConfig::learning_rate);
  real("--decay", &SolverConfig::decay);
  integer("--max-outer", &SolverConfig::max_outer);
  integer("--max-inner", &SolverConfig::max_inner);
}

std::vector<Scenario> scenarios_from(const std::string& source, const GenFlags& gen,
                                     std::uint64_t first_seed) {
  std::vector<Scenario> out;
  if (fs::is_directory(source)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(source))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_scenario(f));
    return out;
  }
  std::size_t used = 0;
  long count = 0;
  try {
    count = std::stol(source, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != source.size() || count <= 0)
    throw Error("--scenarios wants a directory or a positive count, got '" +
                source + "'");
  GenParams p = gen.resolve();
  for (long i = 0; i < count; ++i) {
    p.seed = first_seed + static_cast<std::uint64_t>(i);
    out.push_back(generate_scenario(p));
  }
  return out;
}

int cmd_gen(const GenFlags& gen, std::uint64_t seed, int count, const std::string& out) {
  GenParams p = gen.resolve();
  if (count <= 0) throw Error("--count must be positive");
  const bool single_file = count == 1 && fs::path(out).extension() == ".json";
  if (!single_file) fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    p.seed = seed + static_cast<std::uint64_t>(i);
    const fs::path path =
        single_file ? fs::path(out)
                    : fs::path(out) / ("scenario_" + std::to_string(p.seed) + ".json");
    save_scenario(generate_scenario(p), path);
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_run(const std::string& scenario_path, const std::string& policy_name,
            const std::string& out, const std::string& format,
            const SolverFlags& solver) {
  const Scenario scenario = load_scenario(scenario_path);
  const SolverConfig config = solver.resolve();
  const ExportFormat fmt = parse_format(format);
  std::vector<Policy> policies;
  if (policy_name == "all")
    policies = {Policy::kOnSocMax, Policy::kMaxFirst, Policy::kEqualShare};
  else
    policies = {parse_policy(policy_name)};
  fs::create_directories(out);

  std::ostringstream summary;
  write_summary_csv_header(summary);
  for (Policy policy : policies) {
    const DispatchTrace trace = run_policy(scenario, policy, config);
    const std::string stem = std::string(to_string(policy));
    if (fmt == ExportFormat::kCsv) {
      std::ostringstream body;
      write_trace_csv(trace, body);
      write_text_file(fs::path(out) / ("trace_" + stem + ".csv"), body.str());
    } else {
      write_text_file(fs::path(out) / ("trace_" + stem + ".json"),
                      trace_to_json(trace, scenario.seed));
    }
    write_summary_csv_row(trace, scenario.seed, summary);
    if (const int bad = trace.unconverged_count(); bad > 0)
      std::cerr << "warning: " << stem << ": " << bad
                << " arrival(s) hit the outer iteration limit\n";
  }
  write_text_file(fs::path(out) / "summary.csv", summary.str());
  std::cout << summary.str();
  return 0;
}

int cmd_ratio(const std::string& source, const GenFlags& gen, std::uint64_t seed,
              const std::string& policy_name, const std::string& out,
              const std::string& offline_method, const SolverFlags& solver,
              int threads) {
  const std::vector<Scenario> scenarios = scenarios_from(source, gen, seed);
  const SolverConfig config = solver.resolve();
  const Policy policy = parse_policy(policy_name);
  const RatioReport report =
      competitive_ratio(scenarios, config, offline_config(), threads, policy,
                        parse_offline_method(offline_method));

  std::ostringstream csv;
  csv << "seed,theta_star,theta_on,ratio,alpha_hat,bound_ok\n";
  int failing = 0;
  for (const RatioEntry& e : report.per_scenario) {
    csv << e.seed << ',' << format_real(e.theta_star) << ','
        << format_real(e.theta_on) << ',' << format_real(e.ratio) << ','
        << format_real(e.alpha_hat) << ',' << (e.bound_ok() ? 1 : 0) << '\n';
    failing += !e.bound_ok();
  }
  if (!out.empty()) write_text_file(out, csv.str());
  else std::cout << csv.str();
  std::fprintf(stderr, "scenarios=%zu max_ratio=%s alpha_hat=%s bound_failures=%d\n",
               report.per_scenario.size(), format_real(report.ratio).c_str(),
               format_real(report.alpha_hat).c_str(), failing);
  return 0;
}

int cmd_alpha(double ratio) {
  const AlphaSolution a = solve_alpha(ratio);
  std::printf("alpha=%s residual=%s\n", format_real(a.alpha).c_str(),
              format_real(a.residual).c_str());
  return 0;
}

int cmd_sweep(const GenFlags& gen, const std::string& axis,
              const std::vector<double>& points, int seeds, std::uint64_t first_seed,
              const std::vector<std::string>& policies, const std::string& out,
              const std::string& format, const SolverFlags& solver, int threads) {
  ExperimentConfig c;
  c.base = gen.resolve();
  c.axis = parse_axis(axis);
  c.points = points;
  if (seeds <= 0) throw Error("--seeds must be positive");
  for (int i = 0; i < seeds; ++i) c.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  for (const std::string& p : policies) c.policies.push_back(parse_policy(p));
  c.solver = solver.resolve();
  c.threads = threads;
  const ExperimentResult result = run_experiment(c);
  if (!out.empty()) export_results(result, parse_format(format), out);

  int failed = 0;
  for (const ExperimentRow& row : result.rows) failed += !row.error.empty();
  std::printf("%-12s %-18s %6s %14s %12s\n", to_string(c.axis).data(), "policy",
              "runs", "mean", "std_error");
  for (const PointSummary& s : result.summary)
    std::printf("%-12s %-18s %6d %14.6f %12.6f\n", format_real(s.sweep_value).c_str(),
                s.policy.c_str(), s.runs, s.mean, s.std_error);
  if (failed > 0) std::fprintf(stderr, "warning: %d run(s) failed\n", failed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online dispatching of deadline-aware jobs over a resource mesh"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenFlags gen;
  SolverFlags solver;
  std::uint64_t seed = 0;
  int threads = 0;

  auto* gen_cmd = app.add_subcommand("gen", "Write generated scenario files");
  int count = 1;
  std::string gen_out = "scenarios";
  add_gen_flags(gen_cmd, gen);
  gen_cmd->add_option("--seed", seed, "First seed")->capture_default_str();
  gen_cmd->add_option("--count", count, "Number of scenarios (consecutive seeds)")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Directory, or a .json file when --count 1")
      ->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Dispatch one scenario with a policy");
  std::string scenario_path, policy = "onsocmax", run_out = "out", format = "csv";
  run_cmd->add_option("--scenario", scenario_path, "Scenario JSON")
      ->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--policy", policy,
                      "onsocmax | onsocmax_integral | max_first | equal_share | all")
      ->capture_default_str();
  run_cmd->add_option("--out", run_out, "Output directory")->capture_default_str();
  run_cmd->add_option("--format", format, "csv | json")->capture_default_str();
  add_solver_flags(run_cmd, solver);

  auto* ratio_cmd = app.add_subcommand("ratio", "Offline optimum over online welfare");
  std::string source = "100", ratio_out, offline = "interior_point";
  std::string ratio_policy = "onsocmax";
  ratio_cmd->add_option("--scenarios", source,
                        "Directory of scenario files, or a count to generate")
      ->capture_default_str();
  ratio_cmd->add_option("--seed", seed, "First seed when generating")->capture_default_str();
  ratio_cmd->add_option("--policy", ratio_policy)->capture_default_str();
  ratio_cmd->add_option("--out", ratio_out, "Report CSV (stdout when omitted)");
  ratio_cmd->add_option("--offline", offline,
                        "interior_point | augmented_lagrangian")->capture_default_str();
  ratio_cmd->add_option("--threads", threads, "Worker count (0: default)");
  add_gen_flags(ratio_cmd, gen);
  add_solver_flags(ratio_cmd, solver);

  auto* alpha_cmd = app.add_subcommand("alpha", "Solve the alpha equation for a ratio");
  double ratio = 1.0;
  alpha_cmd->add_option("ratio", ratio, "upsilon / iota (>= 1)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Welfare sweep over one generator axis");
  std::string axis = "duration", sweep_out, sweep_format = "csv";
  std::vector<double> points;
  int seeds = 30;
  std::vector<std::string> policies = {"onsocmax", "max_first", "equal_share"};
  sweep_cmd->add_option("--axis", axis, "duration | workload | congestion")
      ->capture_default_str();
  sweep_cmd->add_option("--points", points, "Sweep values")->required()->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "Seeds per point")->capture_default_str();
  sweep_cmd->add_option("--seed", seed, "First seed")->capture_default_str();
  sweep_cmd->add_option("--policies", policies)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Result file");
  sweep_cmd->add_option("--format", sweep_format, "csv | json")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker count (0: default)");
  add_gen_flags(sweep_cmd, gen);
  add_solver_flags(sweep_cmd, solver);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return cmd_gen(gen, seed, count, gen_out);
    if (*run_cmd) return cmd_run(scenario_path, policy, run_out, format, solver);
    if (*ratio_cmd)
      return cmd_ratio(source, gen, seed, ratio_policy, ratio_out, offline, solver,
                       threads);
    if (*alpha_cmd) return cmd_alpha(ratio);
    if (*sweep_cmd)
      return cmd_sweep(gen, axis, points, seeds, seed, policies, sweep_out,
                       sweep_format, solver, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
