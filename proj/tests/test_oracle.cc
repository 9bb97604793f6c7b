#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "fixtures.h"
#include "meshdispatch/harness.h"
#include "meshdispatch/oracle.h"

using namespace meshdispatch;
using doctest::Approx;
using fixtures::make_job;
using fixtures::make_scenario;
using fixtures::uniform_mesh;

namespace {

// Single-job welfare maximum from the online solver with (almost) free prices.
double unpriced_single_job(const Scenario& s) {
  const Job& j = s.jobs.at(0);
  PseudoWelfareProblem p;
  p.workload = j.workload;
  p.utility = j.utility;
  p.units = available_units(j, s.mesh);
  for (UnitId u : p.units) {
    p.slope.push_back(j.cluster_weight.at(u) / s.mesh.capacity(u));
    p.omega.push_back(0.0);
    p.cap.push_back(std::min(j.per_unit_cap.at(u), s.mesh.capacity(u)));
    p.curves.emplace_back(s.mesh.capacity(u), WelfareBounds{1e-12, 1e-12});
  }
  return solve_pseudo_welfare(p, SolverConfig{}).welfare;
}

void check_offline_feasible(const Scenario& s, const OfflineSolution& sol) {
  REQUIRE(sol.allocation.size() == s.jobs.size());
  std::vector<double> w(s.mesh.unit_count(), 0.0);
  for (std::size_t n = 0; n < s.jobs.size(); ++n) {
    double total = 0.0;
    for (const auto& [u, x] : sol.allocation[n]) {
      CHECK(x >= -1e-12);
      CHECK(x <= s.jobs[n].per_unit_cap.at(u) + 1e-6);
      w[s.mesh.index(u)] += x;
      total += x;
    }
    CHECK(total <= s.jobs[n].workload + 1e-6);
  }
  for (std::size_t r = 0; r < w.size(); ++r) CHECK(w[r] <= s.mesh.capacities()[r] + 1e-6);
}

Scenario desk(std::uint64_t seed, UtilityFamily family) {
  GenParams g;
  g.nodes = 5;
  g.slots = 12;
  g.job_count = 10;
  g.utility_family = family;
  g.seed = seed;
  return generate_scenario(g);
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("offline method names") {
  CHECK(parse_offline_method(to_string(OfflineMethod::kInteriorPoint)) ==
        OfflineMethod::kInteriorPoint);
  CHECK(parse_offline_method(to_string(OfflineMethod::kAugmentedLagrangian)) ==
        OfflineMethod::kAugmentedLagrangian);
  CHECK_THROWS_AS(parse_offline_method("simplex"), Error);
}

TEST_CASE("single job matches the unpriced per-arrival solve") {
  const ResourceMesh m = uniform_mesh(3, 2, 20.0);
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    const Scenario s = make_scenario(m, {make_job(m, 0, 0, 120, 17, {0, 1, 2}, 6, 0.4, f, 2.0)});
    const double ref = unpriced_single_job(s);
    for (auto method : {OfflineMethod::kInteriorPoint, OfflineMethod::kAugmentedLagrangian}) {
      const OfflineSolution sol = offline_optimum(s, offline_config(), method);
      CHECK(sol.welfare == Approx(ref).epsilon(1e-3));
      check_offline_feasible(s, sol);
    }
  }
}

TEST_CASE("disjoint jobs separate") {
  const ResourceMesh m = uniform_mesh(4, 2, 10.0);
  const Job a = make_job(m, 0, 0, 120, 9, {0, 1}, 6, 0.4, UtilityFamily::kLog, 2.0);
  const Job b = make_job(m, 1, 10, 120, 12, {2, 3}, 8, 0.2, UtilityFamily::kLog, 1.5);
  const double both = offline_optimum(make_scenario(m, {a, b})).welfare;
  const double sa = offline_optimum(make_scenario(m, {a})).welfare;
  const double sb = offline_optimum(make_scenario(m, {b})).welfare;
  CHECK(both == Approx(sa + sb).epsilon(1e-6));
}

TEST_CASE("welfare components add up") {
  const Scenario s = desk(2, UtilityFamily::kPoly);
  const OfflineSolution sol = offline_optimum(s);
  CHECK(sol.converged);
  CHECK(sol.welfare == Approx(sol.welfare_jobs + sol.welfare_cluster).epsilon(1e-12));
  double jobs = 0.0, cluster = 0.0;
  for (std::size_t n = 0; n < s.jobs.size(); ++n) {
    jobs += job_utility(s.jobs[n], sol.allocation[n]);
    cluster += cluster_utility(s.jobs[n], s.mesh, sol.allocation[n]);
  }
  CHECK(sol.welfare_jobs == Approx(jobs).epsilon(1e-12));
  CHECK(sol.welfare_cluster == Approx(cluster).epsilon(1e-12));
  check_offline_feasible(s, sol);
}

TEST_CASE("brute force examples") {
  const ResourceMesh one = uniform_mesh(1, 1, 1.0);
  Job j = make_job(one, 0, 0, 30, 1, {0}, 1, 0.0);
  CHECK(brute_force_optimum(make_scenario(one, {j}), 0.5) == Approx(1.0));
  // every nonzero grid point exceeds the 0.4 workload
  j.workload = 0.4;
  CHECK(brute_force_optimum(make_scenario(one, {j}), 0.5) == 0.0);
  CHECK_THROWS_AS(brute_force_optimum(make_scenario(one, {j}), 0.0), Error);
  const ResourceMesh big = uniform_mesh(4, 2, 10.0);
  const Job wide = make_job(big, 0, 0, 120, 5, {0, 1, 2, 3}, 5, 0.1);
  CHECK_THROWS_AS(brute_force_optimum(make_scenario(big, {wide}), 1.0), Error);
}

TEST_CASE("two linear jobs on two units match brute force") {
  const ResourceMesh m = uniform_mesh(2, 1, 5.0);
  const Job a = make_job(m, 0, 0, 30, 6, {0, 1}, 4, 0.5, UtilityFamily::kLinear, 2.0);
  Job b = make_job(m, 1, 1, 30, 6, {0, 1}, 4, 0.5, UtilityFamily::kLinear, 1.0);
  b.cluster_weight[{1, 0}] = 2.0;
  const Scenario s = make_scenario(m, {a, b});
  const double brute = brute_force_optimum(s, 0.5);
  const OfflineSolution sol = offline_optimum(s);
  CHECK(sol.welfare == Approx(brute).epsilon(1e-2));
  check_offline_feasible(s, sol);
}

TEST_CASE("random small instances bracket the brute-force grid") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto family = static_cast<UtilityFamily>(trial % 3);
    const ResourceMesh m = build_mesh(2, 1, 60.0, {2.0 + 4 * u01(rng), 2.0 + 4 * u01(rng)});
    std::vector<Job> jobs;
    for (int n = 0; n < 2; ++n) {
      Job j = make_job(m, n, n, 60, 1.0 + 5 * u01(rng), {0, 1}, 1.0, 0.1, family,
                       1.0 + 2 * u01(rng));
      for (auto& [u, c] : j.per_unit_cap) c = std::min(0.5 + 4 * u01(rng), m.capacity(u));
      for (auto& [u, beta] : j.cluster_weight) beta = 0.1 + 0.4 * u01(rng);
      jobs.push_back(j);
    }
    const Scenario s = make_scenario(m, jobs);
    const double step = 0.05;
    const double brute = brute_force_optimum(s, step);
    const double offline = offline_optimum(s).welfare;
    const WelfareBounds b = welfare_bounds(s);
    CAPTURE(trial);
    CHECK(brute <= offline + 1e-6);
    // poly's marginal is unbounded near zero, so its grid gap is sqrt-sized
    const double gap = family == UtilityFamily::kPoly ? b.upsilon * 4 * std::sqrt(step)
                                                      : b.upsilon * 4 * step;
    CHECK(offline <= brute + gap);
  }
}

TEST_CASE("offline methods agree") {
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    GenParams g;
    g.nodes = 3;
    g.slots = 4;
    g.job_count = 5;
    g.utility_family = f;
    g.seed = 7;
    const Scenario s = generate_scenario(g);
    const double ip = offline_optimum(s, offline_config(), OfflineMethod::kInteriorPoint).welfare;
    const double alm =
        offline_optimum(s, offline_config(), OfflineMethod::kAugmentedLagrangian).welfare;
    CHECK(alm <= ip + 1e-6 * std::max(1.0, ip));
    CHECK(alm == Approx(ip).epsilon(1e-3));
  }
}

TEST_CASE("offline optimum ignores input order") {
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    const Scenario s = desk(11, f);
    Scenario t = s;
    std::reverse(t.jobs.begin(), t.jobs.end());
    std::mt19937_64 rng(1);
    Scenario u = s;
    std::shuffle(u.jobs.begin(), u.jobs.end(), rng);
    const double a = offline_optimum(s).welfare;
    CHECK(offline_optimum(t).welfare == Approx(a).epsilon(1e-4));
    CHECK(offline_optimum(u).welfare == Approx(a).epsilon(1e-4));
  }
}

TEST_CASE("competitive ratio") {
  SUBCASE("empty list") {
    CHECK_THROWS_AS(competitive_ratio({}, SolverConfig{}), Error);
  }
  SUBCASE("one job with ample capacity") {
    const ResourceMesh m = uniform_mesh(3, 2, 100.0);
    for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
      // distinct betas keep iota below the job's best marginal welfare; with
      // iota == upsilon every allocation ties at zero pseudo-welfare
      Job j = make_job(m, 0, 0, 120, 14, {0, 1, 2}, 6, 0.3, f, 2.0);
      for (auto& [u, beta] : j.cluster_weight) beta = 0.2 * (u.node + 1);
      const Scenario s = make_scenario(m, {j});
      const RatioReport r = competitive_ratio({s}, SolverConfig{}, offline_config(), 1);
      CHECK(r.ratio == Approx(1.0).epsilon(1e-2));
    }
  }
  SUBCASE("weak duality and report bookkeeping") {
    std::vector<Scenario> scenarios;
    for (std::uint64_t seed = 0; seed < 6; ++seed)
      scenarios.push_back(desk(seed, static_cast<UtilityFamily>(seed % 3)));
    const RatioReport r = competitive_ratio(scenarios, SolverConfig{}, offline_config(), 2);
    REQUIRE(r.per_scenario.size() == scenarios.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const RatioEntry& e = r.per_scenario[i];
      CHECK(e.seed == scenarios[i].seed);
      CHECK(e.theta_on <= e.theta_star + 1e-6 * std::max(1.0, e.theta_star));
      CHECK(e.ratio == Approx(e.theta_star / e.theta_on));
      CHECK(e.alpha_hat == Approx(solve_alpha(welfare_bounds(scenarios[i]).ratio()).alpha));
      CHECK(e.bound_ok());
      worst = std::max(worst, e.ratio);
    }
    CHECK(r.ratio == worst);
    CHECK_FALSE(r.any_infinite);
  }
  SUBCASE("a greedy policy that fills a unit early loses the later job") {
    const ResourceMesh m = uniform_mesh(1, 1, 10.0);
    const Job first = make_job(m, 0, 0, 30, 10, {0}, 10, 0.0, UtilityFamily::kLinear, 0.5);
    const Job second = make_job(m, 1, 0, 30, 10, {0}, 10, 0.0, UtilityFamily::kLinear, 3.0);
    const Scenario s = make_scenario(m, {first, second});
    const RatioReport r =
        competitive_ratio({s}, SolverConfig{}, offline_config(), 1, Policy::kMaxFirst);
    REQUIRE(r.per_scenario.size() == 1);
    CHECK(r.per_scenario[0].theta_star == Approx(30.0).epsilon(1e-6));
    CHECK(r.per_scenario[0].theta_on == Approx(5.0));
    CHECK(r.per_scenario[0].ratio == Approx(6.0).epsilon(1e-6));
  }
}

TEST_CASE("thread count from the environment") {
  ::setenv("MESHDISPATCH_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  ::unsetenv("MESHDISPATCH_THREADS");
  CHECK(default_thread_count() >= 1);
}

}
