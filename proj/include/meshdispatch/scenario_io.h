#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "meshdispatch/dispatch.h"

namespace meshdispatch {

// Scenario document:
//   {"mesh": {"nodes", "slots", "slot_minutes", "capacities": [node-major]},
//    "jobs": [{"id", "arrival", "deadline", "workload", "eligible_nodes",
//              "caps": {"k,t": v}, "betas": {"k,t": v},
//              "utility": {"family", "coeff"}}],
//    "seed": s}
// Reals keep full double precision.
std::string scenario_to_json(const Scenario& scenario);
// Throws Error on malformed input; the scenario is validated before return.
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// One row per (job, unit): job_id,unit_node,unit_slot,x,accepted,f_value,g_value.
// Jobs with no available unit get a single row with unit -1,-1 and x = 0.
void write_trace_csv(const DispatchTrace& trace, std::ostream& out);

// policy,seed,welfare_jobs,welfare_cluster,welfare_total,rejected_count
void write_summary_csv_header(std::ostream& out);
void write_summary_csv_row(const DispatchTrace& trace, long long seed,
                           std::ostream& out);

// {"policy", "seed", "alpha", "bounds": {"iota", "upsilon"}, welfare totals,
//  "rejected", "jobs": [{"id", "accepted", "f", "g", "mu", "converged",
//  "allocation": {"k,t": x}}]}
std::string trace_to_json(const DispatchTrace& trace, long long seed);

// Writes `body` to `path`, throwing Error with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& body);
std::string read_text_file(const std::filesystem::path& path);

// printf("%.12g") of a double.
std::string format_real(double value);

}  // namespace meshdispatch
