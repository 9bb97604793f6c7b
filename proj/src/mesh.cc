#include "meshdispatch/mesh.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace meshdispatch {

std::string to_key(UnitId unit) {
  return std::to_string(unit.node) + "," + std::to_string(unit.slot);
}

UnitId unit_from_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) throw Error("bad unit key '" + key + "'");
  try {
    std::size_t used_k = 0, used_t = 0;
    const int k = std::stoi(key.substr(0, comma), &used_k);
    const std::string rest = key.substr(comma + 1);
    const int t = std::stoi(rest, &used_t);
    if (used_k != comma || used_t != rest.size()) throw Error("trailing junk");
    return {k, t};
  } catch (const std::exception&) {
    throw Error("bad unit key '" + key + "'");
  }
}

ResourceMesh::ResourceMesh(int node_count, int slot_count, double slot_minutes,
                           std::vector<double> capacities)
    : node_count_(node_count),
      slot_count_(slot_count),
      slot_minutes_(slot_minutes),
      capacities_(std::move(capacities)) {}

double ResourceMesh::capacity(UnitId unit) const {
  if (!contains(unit)) throw Error("unit " + to_key(unit) + " outside mesh");
  return capacities_[index(unit)];
}

ResourceMesh build_mesh(int node_count, int slot_count, double slot_minutes,
                        std::vector<double> capacities) {
  if (node_count <= 0 || slot_count <= 0)
    throw Error("mesh dimensions must be positive");
  if (!(slot_minutes > 0.0)) throw Error("slot length must be positive");
  const auto expected = static_cast<std::size_t>(node_count) * slot_count;
  if (capacities.size() != expected) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << capacities.size()
        << " capacities for " << node_count << "x" << slot_count << " mesh";
    throw Error(msg.str());
  }
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    if (!(capacities[i] > 0.0) || !std::isfinite(capacities[i])) {
      std::ostringstream msg;
      msg << "non-positive capacity " << capacities[i] << " at index " << i;
      throw Error(msg.str());
    }
  }
  return ResourceMesh(node_count, slot_count, slot_minutes,
                      std::move(capacities));
}

std::vector<UnitId> available_units(const Job& job, const ResourceMesh& mesh) {
  const double tau = mesh.slot_minutes();
  const double first = std::ceil(job.arrival_minutes / tau);
  const double last = std::floor(job.deadline_minutes / tau);
  const int t_begin = static_cast<int>(std::max(first, 0.0));
  const int t_end = static_cast<int>(
      std::min(last, static_cast<double>(mesh.slot_count() - 1)));

  std::vector<int> nodes;
  for (int k : job.eligible_nodes)
    if (k >= 0 && k < mesh.node_count()) nodes.push_back(k);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<UnitId> units;
  for (int t = t_begin; t <= t_end; ++t)
    for (int k : nodes) units.push_back({k, t});
  return units;
}

void sort_by_arrival(std::vector<Job>& jobs) {
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    if (a.arrival_minutes != b.arrival_minutes)
      return a.arrival_minutes < b.arrival_minutes;
    return a.id < b.id;
  });
}

namespace {

void check_mesh(const ResourceMesh& mesh, std::vector<std::string>& out) {
  if (mesh.node_count() <= 0 || mesh.slot_count() <= 0) {
    out.push_back("mesh: dimensions must be positive");
    return;
  }
  if (!(mesh.slot_minutes() > 0.0)) out.push_back("mesh: slot length <= 0");
  const auto expected =
      static_cast<std::size_t>(mesh.node_count()) * mesh.slot_count();
  if (mesh.unit_count() != expected) {
    out.push_back("mesh: capacity count does not match dimensions");
    return;
  }
  for (std::size_t i = 0; i < mesh.unit_count(); ++i) {
    if (!(mesh.capacities()[i] > 0.0))
      out.push_back("mesh: non-positive capacity at unit " +
                    to_key(mesh.unit_at(i)));
  }
}

void check_keys(const Job& job, const char* what, const UnitMap& map,
                const std::vector<UnitId>& units,
                std::vector<std::string>& out) {
  const std::string prefix = "job " + std::to_string(job.id) + ": ";
  for (UnitId u : units)
    if (!map.contains(u))
      out.push_back(prefix + what + " missing unit " + to_key(u));
  const std::set<UnitId> allowed(units.begin(), units.end());
  for (const auto& [u, v] : map)
    if (!allowed.contains(u))
      out.push_back(prefix + what + " has unit " + to_key(u) +
                    " outside the available set");
}

void check_job(const Job& job, const ResourceMesh& mesh,
               std::vector<std::string>& out) {
  const std::string prefix = "job " + std::to_string(job.id) + ": ";
  if (!(job.arrival_minutes >= 0.0)) out.push_back(prefix + "negative arrival");
  if (!(job.deadline_minutes > job.arrival_minutes))
    out.push_back(prefix + "deadline <= arrival");
  if (!(job.workload > 0.0)) out.push_back(prefix + "non-positive workload");
  if (!(job.utility.coeff > 0.0))
    out.push_back(prefix + "non-positive utility coefficient");
  for (int k : job.eligible_nodes)
    if (k < 0 || k >= mesh.node_count())
      out.push_back(prefix + "eligible node " + std::to_string(k) +
                    " outside mesh");

  const auto units = available_units(job, mesh);
  check_keys(job, "caps", job.per_unit_cap, units, out);
  check_keys(job, "betas", job.cluster_weight, units, out);

  for (const auto& [u, cap] : job.per_unit_cap) {
    if (!mesh.contains(u)) continue;
    if (!(cap >= 0.0))
      out.push_back(prefix + "negative cap at " + to_key(u));
    else if (cap > mesh.capacity(u))
      out.push_back(prefix + "cap exceeds capacity at " + to_key(u));
  }
  for (const auto& [u, beta] : job.cluster_weight)
    if (!(beta > 0.0))
      out.push_back(prefix + "non-positive beta at " + to_key(u));
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& scenario) {
  std::vector<std::string> out;
  check_mesh(scenario.mesh, out);
  if (!out.empty()) return out;

  std::set<int> ids;
  for (std::size_t i = 0; i < scenario.jobs.size(); ++i) {
    const Job& job = scenario.jobs[i];
    if (!ids.insert(job.id).second)
      out.push_back("job " + std::to_string(job.id) + ": duplicate id");
    if (i > 0) {
      const Job& prev = scenario.jobs[i - 1];
      const bool ordered =
          prev.arrival_minutes < job.arrival_minutes ||
          (prev.arrival_minutes == job.arrival_minutes && prev.id < job.id);
      if (!ordered)
        out.push_back("job " + std::to_string(job.id) +
                      ": out of arrival order");
    }
    check_job(job, scenario.mesh, out);
  }
  return out;
}

}  // namespace meshdispatch
