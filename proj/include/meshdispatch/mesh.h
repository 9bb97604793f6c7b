#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshdispatch/utility_spec.h"

namespace meshdispatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A resource unit: one node during one time slot. Ordering is (slot, node),
// which is the canonical iteration order everywhere in the library.
struct UnitId {
  int node = 0;
  int slot = 0;

  friend bool operator==(const UnitId&, const UnitId&) = default;
  friend std::strong_ordering operator<=>(const UnitId& a, const UnitId& b) {
    if (auto c = a.slot <=> b.slot; c != 0) return c;
    return a.node <=> b.node;
  }
};

std::string to_key(UnitId unit);   // "k,t"
UnitId unit_from_key(const std::string& key);

using UnitMap = std::map<UnitId, double>;

// The spatio-temporal grid K x T. Immutable after construction.
class ResourceMesh {
 public:
  ResourceMesh() = default;
  ResourceMesh(int node_count, int slot_count, double slot_minutes,
               std::vector<double> capacities);

  int node_count() const { return node_count_; }
  int slot_count() const { return slot_count_; }
  double slot_minutes() const { return slot_minutes_; }
  std::size_t unit_count() const { return capacities_.size(); }

  bool contains(UnitId unit) const {
    return unit.node >= 0 && unit.node < node_count_ && unit.slot >= 0 &&
           unit.slot < slot_count_;
  }
  // Row-major, node-major: index = node * slot_count + slot.
  std::size_t index(UnitId unit) const {
    return static_cast<std::size_t>(unit.node) * slot_count_ + unit.slot;
  }
  UnitId unit_at(std::size_t index) const {
    return {static_cast<int>(index / slot_count_),
            static_cast<int>(index % slot_count_)};
  }
  double capacity(UnitId unit) const;
  std::span<const double> capacities() const { return capacities_; }

 private:
  int node_count_ = 0;
  int slot_count_ = 0;
  double slot_minutes_ = 0.0;
  std::vector<double> capacities_;
};

struct Job {
  int id = 0;
  double arrival_minutes = 0.0;
  double deadline_minutes = 0.0;
  double workload = 0.0;            // target input workload (MB)
  std::vector<int> eligible_nodes;  // service locality
  UnitMap per_unit_cap;             // job-specific processing cap per unit
  UnitMap cluster_weight;           // beta per unit
  UtilitySpec utility;
};

struct Scenario {
  ResourceMesh mesh;
  std::vector<Job> jobs;  // sorted by (arrival, id)
  long long seed = 0;
};

// Throws Error on a dimension mismatch or a non-positive capacity.
ResourceMesh build_mesh(int node_count, int slot_count, double slot_minutes,
                        std::vector<double> capacities);

// Units (k, t) with ceil(a/tau) <= t <= floor(d/tau) and k eligible, clipped
// to the mesh, ordered by (t, k). Empty when the window contains no slot.
std::vector<UnitId> available_units(const Job& job, const ResourceMesh& mesh);

// Every invariant violation found, in a stable order. Empty means valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Sorts jobs by arrival with the lower id first on ties.
void sort_by_arrival(std::vector<Job>& jobs);

}  // namespace meshdispatch
