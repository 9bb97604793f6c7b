#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.h"

using namespace meshdispatch;
using fixtures::make_job;
using fixtures::uniform_mesh;

TEST_SUITE("mesh") {

TEST_CASE("build_mesh single unit") {
  const ResourceMesh m = build_mesh(1, 1, 60.0, {20.0});
  CHECK(m.unit_count() == 1);
  CHECK(m.capacity({0, 0}) == 20.0);
}

TEST_CASE("build_mesh reference size and node-major layout") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> cap(20.0, 2.0);
  std::vector<double> caps(240);
  for (double& c : caps) c = std::max(1.0, cap(rng));
  const ResourceMesh m = build_mesh(10, 24, 60.0, caps);
  CHECK(m.unit_count() == 240);
  CHECK(m.capacity({3, 5}) == caps[3 * 24 + 5]);
  // round trip
  CHECK(std::equal(caps.begin(), caps.end(), m.capacities().begin()));
  for (std::size_t i = 0; i < m.unit_count(); ++i) CHECK(m.index(m.unit_at(i)) == i);
}

TEST_CASE("build_mesh rejects bad input") {
  CHECK_THROWS_AS(build_mesh(2, 2, 60.0, {1, 2, 3}), Error);
  CHECK_THROWS_AS(build_mesh(1, 2, 60.0, {1, 0}), Error);
  CHECK_THROWS_AS(build_mesh(1, 1, 60.0, {-3}), Error);
  CHECK_THROWS_AS(build_mesh(0, 1, 60.0, {}), Error);
}

TEST_CASE("unit keys") {
  CHECK(to_key({3, 11}) == "3,11");
  CHECK(unit_from_key("3,11") == UnitId{3, 11});
  CHECK_THROWS_AS(unit_from_key("3;11"), Error);
  CHECK_THROWS_AS(unit_from_key("3,1x"), Error);
  CHECK(UnitId{5, 0} < UnitId{0, 1});  // slot first
}

TEST_CASE("available_units examples") {
  const ResourceMesh m = uniform_mesh(2, 4, 20.0);
  Job j;
  j.arrival_minutes = 0;
  j.deadline_minutes = 120;
  j.eligible_nodes = {0};
  CHECK(available_units(j, m) == std::vector<UnitId>{{0, 0}, {0, 1}, {0, 2}});

  j.arrival_minutes = 61;
  j.deadline_minutes = 119;
  j.eligible_nodes = {0, 1};
  CHECK(available_units(j, m).empty());

  // ceil(60/60) = 1 <= floor(60.5/60) = 1: one slot.
  j.arrival_minutes = 60;
  j.deadline_minutes = 60.5;
  CHECK(available_units(j, m) == std::vector<UnitId>{{0, 1}, {1, 1}});
}

TEST_CASE("available_units is ordered by slot then node and clipped") {
  const ResourceMesh m = uniform_mesh(3, 3, 20.0);
  Job j;
  j.arrival_minutes = 30;
  j.deadline_minutes = 1000;
  j.eligible_nodes = {2, 0};
  const auto units = available_units(j, m);
  CHECK(units == std::vector<UnitId>{{0, 1}, {2, 1}, {0, 2}, {2, 2}});
}

TEST_CASE("available_units properties on random jobs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> minute(0.0, 600.0);
  const ResourceMesh m = uniform_mesh(4, 10, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    Job j;
    j.arrival_minutes = minute(rng);
    j.deadline_minutes = j.arrival_minutes + minute(rng);
    for (int k = 0; k < 4; ++k)
      if (rng() % 2) j.eligible_nodes.push_back(k);
    const auto units = available_units(j, m);
    CHECK(std::is_sorted(units.begin(), units.end()));
    const double lo = std::ceil(j.arrival_minutes / 60.0);
    const double hi = std::floor(j.deadline_minutes / 60.0);
    for (UnitId u : units) {
      CHECK(u.slot >= lo);
      CHECK(u.slot <= hi);
      CHECK(std::find(j.eligible_nodes.begin(), j.eligible_nodes.end(), u.node) !=
            j.eligible_nodes.end());
    }
    // monotone in the deadline
    Job later = j;
    later.deadline_minutes += minute(rng);
    const auto more = available_units(later, m);
    CHECK(std::includes(more.begin(), more.end(), units.begin(), units.end()));
  }
}

TEST_CASE("validate_scenario examples") {
  const ResourceMesh m = uniform_mesh(2, 4, 20.0);
  std::vector<Job> jobs = {make_job(m, 0, 0, 120, 5, {0, 1}, 7, 0.3),
                           make_job(m, 1, 30, 200, 5, {1}, 7, 0.3)};
  const Scenario ok = fixtures::make_scenario(m, jobs);
  CHECK(validate_scenario(ok).empty());

  Scenario same_time = ok;
  same_time.jobs[1] = make_job(m, 1, 30, 30, 5, {1}, 7, 0.3);
  CHECK(validate_scenario(same_time).size() == 1);

  Scenario too_big = ok;
  too_big.jobs[0].per_unit_cap.begin()->second = 21.0;
  const auto problems = validate_scenario(too_big);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("cap exceeds capacity") != std::string::npos);
}

TEST_CASE("validate_scenario reports every violation") {
  const ResourceMesh m = uniform_mesh(2, 4, 20.0);
  Job a = make_job(m, 0, 0, 120, 5, {0}, 7, 0.3);
  Job b = make_job(m, 0, 10, 120, -1, {0, 5}, 7, 0.3);
  b.cluster_weight.erase(b.cluster_weight.begin());
  a.arrival_minutes = 50;  // now after b: out of order
  Scenario s;
  s.mesh = m;
  s.jobs = {a, b};
  const auto problems = validate_scenario(s);
  auto has = [&](const char* text) {
    return std::any_of(problems.begin(), problems.end(), [&](const std::string& p) {
      return p.find(text) != std::string::npos;
    });
  };
  CHECK(has("duplicate id"));
  CHECK(has("out of arrival order"));
  CHECK(has("non-positive workload"));
  CHECK(has("outside mesh"));
  CHECK(has("betas missing"));
}

TEST_CASE("sort_by_arrival breaks ties by id") {
  std::vector<Job> jobs(3);
  jobs[0].id = 2, jobs[0].arrival_minutes = 5;
  jobs[1].id = 1, jobs[1].arrival_minutes = 5;
  jobs[2].id = 0, jobs[2].arrival_minutes = 9;
  sort_by_arrival(jobs);
  CHECK(jobs[0].id == 1);
  CHECK(jobs[1].id == 2);
  CHECK(jobs[2].id == 0);
}

}
