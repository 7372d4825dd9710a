#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "accord/harness/metrics.hpp"

namespace accord::harness {

// CSV schema, stable across releases:
// job_id,submit_t,sel_start_t,sel_end_t,wait_s,selection_s,sched_latency_s,
// winner,winner_level,outcome,reselections,messages
extern const char* kCsvHeader;

std::string render_csv(const std::map<JobId, MetricRecord>& rows);

struct CsvRow {
    std::string job_id;
    std::optional<double> submit_t, sel_start_t, sel_end_t;
    std::optional<double> wait_s, selection_s, sched_latency_s;
    std::string winner;
    std::optional<int> winner_level;
    std::string outcome;
    int reselections = 0;
    std::uint64_t messages = 0;
};

std::vector<CsvRow> parse_csv(const std::string& text);

struct DistStats {
    std::size_t n = 0;
    double mean = 0, median = 0, p95 = 0, p99 = 0, stddev = 0;
};

// Nearest-rank percentiles over a copy of the values.
DistStats dist_stats(std::vector<double> values);

// Shannon entropy (base 2) of the winning-agent distribution over completed
// jobs.
double leader_entropy(const std::vector<CsvRow>& rows);

// Everything recomputable from the CSV text alone; the independent-reader
// equality check compares this struct.
struct CsvSummary {
    std::size_t jobs = 0, complete = 0, infeasible = 0, unfinished = 0;
    double completion_pct = 0;
    DistStats selection, sched_latency, wait;
    double entropy = 0;
    std::uint64_t reselections = 0;
    std::uint64_t messages = 0;
    std::size_t distinct_winners = 0;
};

CsvSummary summarize_csv(const std::vector<CsvRow>& rows);

nlohmann::json csv_summary_json(const CsvSummary& s);
CsvSummary csv_summary_from_json(const nlohmann::json& j);
bool csv_summary_equal(const CsvSummary& a, const CsvSummary& b);

}  // namespace accord::harness
