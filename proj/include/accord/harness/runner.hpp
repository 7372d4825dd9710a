#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "accord/harness/scenario.hpp"
#include "accord/harness/summary.hpp"

namespace accord::harness {

// One repetition's outputs: the metrics CSV, the summary (csv-derived stats
// plus event-derived sections) and the invariant audits.
struct RepResult {
    std::string csv;
    CsvSummary csv_summary;
    nlohmann::json summary;
    runtime::RunReport report;

    // convenience extracts
    double selection_mean_all_levels_s = 0.0;
    std::map<int, std::size_t> commits_by_level;
    std::map<int, double> selection_mean_by_level_s;
    double participation_rate = 0.0;
    std::uint64_t messages_total = 0;

    std::vector<std::string> cas_violations;
    std::vector<std::string> orphan_violations;
    // Incomplete jobs that a surviving agent could still host (informational
    // for normal runs, asserted empty by the failure scenarios).
    std::vector<std::string> feasibility_violations;

    bool invariants_ok() const {
        return !report.safety_violated && cas_violations.empty() && orphan_violations.empty();
    }
};

RepResult run_scenario(const Scenario& sc, int repetition, std::uint64_t seed_override = 0,
                       const runtime::RunOptions& opts = {});

// Walks the CAS log: per job, at most one successful execution commit per
// selection epoch (epochs are separated by resets to Pending).
std::vector<std::string> audit_cas_log(const std::vector<sim::CasLogEntry>& log);

struct CompareRow {
    std::string name;
    double selection_mean_s = 0.0;
    double selection_std_s = 0.0;
    double completion_pct = 0.0;
    double messages_per_job = 0.0;
    int repetitions = 0;
};

CompareRow summarize_reps(const Scenario& sc, const std::vector<RepResult>& reps);

}  // namespace accord::harness
