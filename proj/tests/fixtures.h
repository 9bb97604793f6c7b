#pragma once

#include <algorithm>
#include <vector>

#include "meshdispatch/mesh.h"

namespace fixtures {

using namespace meshdispatch;

inline ResourceMesh uniform_mesh(int nodes, int slots, double capacity,
                                 double tau = 60.0) {
  return build_mesh(nodes, slots, tau,
                    std::vector<double>(static_cast<std::size_t>(nodes) * slots,
                                        capacity));
}

// A job whose caps and betas cover exactly its available units.
inline Job make_job(const ResourceMesh& mesh, int id, double arrival,
                    double deadline, double workload, std::vector<int> nodes,
                    double cap, double beta, UtilityFamily family = UtilityFamily::kLinear,
                    double coeff = 1.0) {
  Job j;
  j.id = id;
  j.arrival_minutes = arrival;
  j.deadline_minutes = deadline;
  j.workload = workload;
  j.eligible_nodes = std::move(nodes);
  j.utility = {family, coeff};
  for (UnitId u : available_units(j, mesh)) {
    j.per_unit_cap[u] = std::min(cap, mesh.capacity(u));
    j.cluster_weight[u] = beta;
  }
  return j;
}

inline Scenario make_scenario(ResourceMesh mesh, std::vector<Job> jobs) {
  Scenario s;
  s.mesh = std::move(mesh);
  s.jobs = std::move(jobs);
  sort_by_arrival(s.jobs);
  return s;
}

}  // namespace fixtures
