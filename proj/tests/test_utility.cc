#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.h"
#include "meshdispatch/utility.h"
#include "oracles.h"

using namespace meshdispatch;
using doctest::Approx;
using fixtures::make_job;
using fixtures::uniform_mesh;

TEST_SUITE("utility") {

TEST_CASE("family names round trip") {
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly})
    CHECK(parse_family(to_string(f)) == f);
  CHECK_THROWS_AS(parse_family("cubic"), Error);
}

TEST_CASE("job_utility examples") {
  const ResourceMesh m = uniform_mesh(2, 1, 20.0);
  Job lin = make_job(m, 0, 0, 30, 10, {0, 1}, 10, 0.5, UtilityFamily::kLinear, 2.0);
  CHECK(job_utility(lin, {{{0, 0}, 1.0}, {{1, 0}, 3.0}}) == Approx(8.0));
  Job poly = make_job(m, 0, 0, 30, 10, {0, 1}, 10, 0.5, UtilityFamily::kPoly, 1.0);
  CHECK(job_utility(poly, {{{0, 0}, 4.0}, {{1, 0}, 9.0}}) == Approx(5.0));
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    Job j = make_job(m, 0, 0, 30, 10, {0, 1}, 10, 0.5, f, 1.7);
    CHECK(job_utility(j, {{{0, 0}, 0.0}, {{1, 0}, 0.0}}) == 0.0);
  }
  CHECK_THROWS_AS(job_utility(lin, {{{0, 3}, 1.0}}), Error);
}

TEST_CASE("cluster_utility examples") {
  const ResourceMesh m = uniform_mesh(2, 1, 20.0);
  Job j = make_job(m, 0, 0, 30, 40, {0, 1}, 20, 0.5);
  CHECK(cluster_utility(j, m, {{{0, 0}, 10.0}}) == Approx(0.25));
  CHECK(cluster_utility(j, m, {{{0, 0}, 0.0}}) == 0.0);
  j.cluster_weight[{0, 0}] = 0.1;
  CHECK(cluster_utility(j, m, {{{0, 0}, 20.0}, {{1, 0}, 20.0}}) == Approx(0.6));
  j.cluster_weight.erase({1, 0});
  CHECK_THROWS_AS(cluster_utility(j, m, {{{1, 0}, 1.0}}), Error);
}

TEST_CASE("utility families are zero-startup, non-decreasing and concave") {
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    const UtilitySpec u{f, 1.3};
    CHECK(u.value(0.0) == 0.0);
    for (double x = 0.0; x < 20.0; x += 0.25) {
      const double h = 0.25;
      CHECK(u.value(x + h) >= u.value(x));
      CHECK(u.value(x + 2 * h) - 2 * u.value(x + h) + u.value(x) <= 1e-12);
    }
    for (double x = 0.5; x < 20.0; x += 0.5)
      CHECK(u.marginal(x) ==
            Approx(oracle::central_difference([&](double y) { return u.value(y); }, x, 1e-6))
                .epsilon(1e-6));
  }
}

TEST_CASE("welfare_bounds examples") {
  const ResourceMesh m = uniform_mesh(2, 1, 10.0);
  SUBCASE("same linear coefficient and beta/C") {
    std::vector<Job> jobs = {make_job(m, 0, 0, 30, 5, {0, 1}, 5, 1.0, UtilityFamily::kLinear, 2.0),
                             make_job(m, 1, 1, 30, 5, {0, 1}, 5, 1.0, UtilityFamily::kLinear, 2.0)};
    const WelfareBounds b = welfare_bounds(fixtures::make_scenario(m, jobs));
    CHECK(b.iota == Approx(2.1));
    CHECK(b.upsilon == Approx(2.1));
  }
  SUBCASE("two betas") {
    Job j = make_job(m, 0, 0, 30, 5, {0, 1}, 5, 1.0);
    j.cluster_weight[{1, 0}] = 3.0;
    const WelfareBounds b = welfare_bounds(fixtures::make_scenario(m, {j}));
    CHECK(b.iota == Approx(1.1));
    CHECK(b.upsilon == Approx(1.3));
  }
  SUBCASE("log endpoints") {
    const ResourceMesh big = uniform_mesh(1, 1, 50.0);
    Job j = make_job(big, 0, 0, 30, 10, {0}, 7, 1.0, UtilityFamily::kLog, 2.0);
    const WelfareBounds b = welfare_bounds(fixtures::make_scenario(big, {j}));
    CHECK(b.iota == Approx(0.27));
    CHECK(b.upsilon == Approx(2.02));
  }
  CHECK_THROWS_AS(welfare_bounds(fixtures::make_scenario(m, {})), Error);
}

TEST_CASE("welfare_bounds enclose every sampled marginal") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coeff(1.0, 3.0), beta(0.1, 0.5), cap(0.1, 9.0);
  const ResourceMesh m = uniform_mesh(3, 2, 20.0);
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    std::vector<Job> jobs;
    for (int n = 0; n < 6; ++n) {
      Job j = make_job(m, n, n, 200, 5, {0, 1, 2}, 1.0, 0.3, f, coeff(rng));
      for (auto& [u, c] : j.per_unit_cap) c = cap(rng);
      for (auto& [u, b] : j.cluster_weight) b = beta(rng);
      jobs.push_back(j);
    }
    const Scenario s = fixtures::make_scenario(m, jobs);
    const WelfareBounds b = welfare_bounds(s);
    CHECK(b.iota <= b.upsilon);
    for (const Job& j : s.jobs)
      for (const auto& [u, c] : j.per_unit_cap)
        for (int i = 0; i <= 200; ++i) {
          const double x = kDerivClamp + (c - kDerivClamp) * i / 200.0;
          const double w = j.utility.marginal(x) + j.cluster_weight.at(u) / m.capacity(u);
          CHECK(w >= b.iota - 1e-12);
          CHECK(w <= b.upsilon + 1e-12);
        }
  }
}

TEST_CASE("conjugate_value examples") {
  const UtilitySpec lin{UtilityFamily::kLinear, 1.0};
  auto a = conjugate_value(lin, 0.2, 5.0, 0.5);
  CHECK(a.value == Approx(3.5));
  CHECK(a.maximizer == Approx(5.0));
  auto b = conjugate_value(lin, 0.2, 5.0, 2.0);
  CHECK(b.value == 0.0);
  CHECK(b.maximizer == 0.0);
  const UtilitySpec lg{UtilityFamily::kLog, 1.0};
  auto c = conjugate_value(lg, 0.0, 10.0, 0.25);
  CHECK(c.maximizer == Approx(3.0));
  CHECK(c.value == Approx(0.636294361119890618).epsilon(1e-12));
  CHECK(c.value == Approx(oracle::grid_conjugate(UtilityFamily::kLog, 1.0, 0.0, 10.0, 0.25, 10001).first)
                       .epsilon(1e-6));
}

TEST_CASE("conjugate_value reads cap, beta and capacity from the job") {
  const ResourceMesh m = uniform_mesh(1, 1, 10.0);
  const Job j = make_job(m, 0, 0, 30, 10, {0}, 5.0, 2.0);
  const auto p = conjugate_value(j, m, {0, 0}, 0.5);
  CHECK(p.value == Approx(3.5));
  CHECK(p.maximizer == Approx(5.0));
}

TEST_CASE("conjugate against grid search, non-increasing and non-negative") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coeff(0.5, 3.0), slope(0.0, 0.05), cap(0.1, 10.0),
      price(0.0, 4.0);
  for (auto f : {UtilityFamily::kLinear, UtilityFamily::kLog, UtilityFamily::kPoly}) {
    for (int trial = 0; trial < 60; ++trial) {
      const UtilitySpec u{f, coeff(rng)};
      const double s = slope(rng), c = cap(rng);
      const double p1 = price(rng), p2 = p1 + price(rng);
      const auto v1 = conjugate_value(u, s, c, p1);
      const auto v2 = conjugate_value(u, s, c, p2);
      CHECK(v1.value >= 0.0);
      CHECK(v2.value <= v1.value + 1e-12);
      const auto grid = oracle::grid_conjugate(f, u.coeff, s, c, p1, 10000);
      // No grid point beats the returned maximizer, and the reported value is
      // the objective there.
      const double at = oracle::utility_value(f, u.coeff, v1.maximizer) +
                        (s - p1) * v1.maximizer;
      CHECK(v1.maximizer >= 0.0);
      CHECK(v1.maximizer <= c);
      CHECK(at >= grid.first - 1e-12);
      CHECK(at == Approx(v1.value).epsilon(1e-12));
    }
  }
}

}
