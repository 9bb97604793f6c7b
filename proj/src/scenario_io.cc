#include "meshdispatch/scenario_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace meshdispatch {

using nlohmann::json;

namespace {

json unit_map_to_json(const UnitMap& m) {
  json out = json::object();
  for (const auto& [unit, v] : m) out[to_key(unit)] = v;
  return out;
}

UnitMap unit_map_from_json(const json& j) {
  UnitMap out;
  for (const auto& [key, v] : j.items()) out[unit_from_key(key)] = v.get<double>();
  return out;
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
  const ResourceMesh& mesh = scenario.mesh;
  json doc;
  doc["mesh"] = {{"nodes", mesh.node_count()},
                 {"slots", mesh.slot_count()},
                 {"slot_minutes", mesh.slot_minutes()},
                 {"capacities", std::vector<double>(mesh.capacities().begin(),
                                                    mesh.capacities().end())}};
  json jobs = json::array();
  for (const Job& job : scenario.jobs) {
    jobs.push_back({{"id", job.id},
                    {"arrival", job.arrival_minutes},
                    {"deadline", job.deadline_minutes},
                    {"workload", job.workload},
                    {"eligible_nodes", job.eligible_nodes},
                    {"caps", unit_map_to_json(job.per_unit_cap)},
                    {"betas", unit_map_to_json(job.cluster_weight)},
                    {"utility",
                     {{"family", std::string(to_string(job.utility.family))},
                      {"coeff", job.utility.coeff}}}});
  }
  doc["jobs"] = std::move(jobs);
  doc["seed"] = scenario.seed;
  return doc.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  Scenario s;
  try {
    const json doc = json::parse(text);
    const json& m = doc.at("mesh");
    s.mesh = build_mesh(m.at("nodes").get<int>(), m.at("slots").get<int>(),
                        m.at("slot_minutes").get<double>(),
                        m.at("capacities").get<std::vector<double>>());
    for (const json& j : doc.at("jobs")) {
      Job job;
      job.id = j.at("id").get<int>();
      job.arrival_minutes = j.at("arrival").get<double>();
      job.deadline_minutes = j.at("deadline").get<double>();
      job.workload = j.at("workload").get<double>();
      job.eligible_nodes = j.at("eligible_nodes").get<std::vector<int>>();
      job.per_unit_cap = unit_map_from_json(j.at("caps"));
      job.cluster_weight = unit_map_from_json(j.at("betas"));
      const json& u = j.at("utility");
      job.utility.family = parse_family(u.at("family").get<std::string>());
      job.utility.coeff = u.at("coeff").get<double>();
      s.jobs.push_back(std::move(job));
    }
    s.seed = doc.value("seed", 0LL);
  } catch (const json::exception& e) {
    throw Error(std::string("scenario document: ") + e.what());
  }
  const auto problems = validate_scenario(s);
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(msg);
  }
  return s;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body;
  out.close();
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  write_text_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_text_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_trace_csv(const DispatchTrace& trace, std::ostream& out) {
  out << "job_id,unit_node,unit_slot,x,accepted,f_value,g_value\n";
  for (const JobOutcome& o : trace.per_job) {
    const std::string tail = "," + std::to_string(o.accepted ? 1 : 0) + "," +
                             format_real(o.f_value) + "," +
                             format_real(o.g_value) + "\n";
    const Allocation& a = o.allocation;
    if (a.units.empty()) {
      out << o.job_id << ",-1,-1,0" << tail;
      continue;
    }
    for (std::size_t i = 0; i < a.units.size(); ++i)
      out << o.job_id << ',' << a.units[i].node << ',' << a.units[i].slot << ','
          << format_real(a.x[i]) << tail;
  }
}

std::string trace_to_json(const DispatchTrace& trace, long long seed) {
  json doc;
  doc["policy"] = std::string(to_string(trace.policy));
  doc["seed"] = seed;
  doc["alpha"] = trace.alpha;
  doc["bounds"] = {{"iota", trace.bounds.iota}, {"upsilon", trace.bounds.upsilon}};
  doc["welfare_jobs"] = trace.welfare_jobs;
  doc["welfare_cluster"] = trace.welfare_cluster;
  doc["welfare_total"] = trace.welfare_total;
  doc["rejected"] = trace.rejected_count();
  json jobs = json::array();
  for (const JobOutcome& o : trace.per_job) {
    json alloc = json::object();
    for (std::size_t i = 0; i < o.allocation.units.size(); ++i)
      alloc[to_key(o.allocation.units[i])] = o.allocation.x[i];
    jobs.push_back({{"id", o.job_id},
                    {"accepted", o.accepted},
                    {"f", o.f_value},
                    {"g", o.g_value},
                    {"mu", o.allocation.mu},
                    {"converged", o.allocation.converged},
                    {"allocation", std::move(alloc)}});
  }
  doc["jobs"] = std::move(jobs);
  return doc.dump(2) + "\n";
}

void write_summary_csv_header(std::ostream& out) {
  out << "policy,seed,welfare_jobs,welfare_cluster,welfare_total,rejected_count\n";
}

void write_summary_csv_row(const DispatchTrace& trace, long long seed,
                           std::ostream& out) {
  out << to_string(trace.policy) << ',' << seed << ','
      << format_real(trace.welfare_jobs) << ','
      << format_real(trace.welfare_cluster) << ','
      << format_real(trace.welfare_total) << ',' << trace.rejected_count()
      << '\n';
}

}  // namespace meshdispatch
