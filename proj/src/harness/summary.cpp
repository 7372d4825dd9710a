#include "accord/harness/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "accord/core/time.hpp"

namespace accord::harness {

const char* kCsvHeader =
    "job_id,submit_t,sel_start_t,sel_end_t,wait_s,selection_s,sched_latency_s,"
    "winner,winner_level,outcome,reselections,messages";

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::string opt_fmt(const std::optional<SimTime>& t) {
    return t ? fmt(to_seconds(*t)) : std::string{};
}

}  // namespace

std::string render_csv(const std::map<JobId, MetricRecord>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& [id, r] : rows) {
        out += r.job_id;
        out += ',';
        out += opt_fmt(r.submit_t);
        out += ',';
        out += opt_fmt(r.sel_start_t);
        out += ',';
        out += opt_fmt(r.sel_end_t);
        out += ',';
        if (r.submit_t && r.sel_start_t) out += fmt(to_seconds(*r.sel_start_t - *r.submit_t));
        out += ',';
        if (r.sel_start_t && r.sel_end_t) out += fmt(to_seconds(*r.sel_end_t - *r.sel_start_t));
        out += ',';
        if (r.submit_t && r.sel_end_t) out += fmt(to_seconds(*r.sel_end_t - *r.submit_t));
        out += ',';
        out += r.winner;
        out += ',';
        if (r.winner_level >= 0) out += std::to_string(r.winner_level);
        out += ',';
        out += to_string(r.outcome);
        out += ',';
        out += std::to_string(r.reselections);
        out += ',';
        out += std::to_string(r.messages);
        out += '\n';
    }
    return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line != kCsvHeader) {
                throw std::runtime_error("unexpected CSV header: " + line);
            }
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 12) throw std::runtime_error("bad CSV row: " + line);
        auto num = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        CsvRow r;
        r.job_id = f[0];
        r.submit_t = num(f[1]);
        r.sel_start_t = num(f[2]);
        r.sel_end_t = num(f[3]);
        r.wait_s = num(f[4]);
        r.selection_s = num(f[5]);
        r.sched_latency_s = num(f[6]);
        r.winner = f[7];
        if (!f[8].empty()) r.winner_level = std::stoi(f[8]);
        r.outcome = f[9];
        r.reselections = std::stoi(f[10]);
        r.messages = static_cast<std::uint64_t>(std::stoull(f[11]));
        rows.push_back(std::move(r));
    }
    return rows;
}

DistStats dist_stats(std::vector<double> values) {
    DistStats s;
    s.n = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    auto rank = [&](double p) {
        std::size_t idx = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(values.size())));
        if (idx == 0) idx = 1;
        if (idx > values.size()) idx = values.size();
        return values[idx - 1];
    };
    s.median = rank(0.50);
    s.p95 = rank(0.95);
    s.p99 = rank(0.99);
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1
                   ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                   : 0.0;
    return s;
}

double leader_entropy(const std::vector<CsvRow>& rows) {
    std::map<std::string, std::size_t> wins;
    std::size_t total = 0;
    for (const auto& r : rows) {
        if (r.outcome != "complete" || r.winner.empty()) continue;
        ++wins[r.winner];
        ++total;
    }
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const auto& [agent, n] : wins) {
        double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

CsvSummary summarize_csv(const std::vector<CsvRow>& rows) {
    CsvSummary s;
    s.jobs = rows.size();
    std::vector<double> selection, latency, wait;
    std::map<std::string, bool> winners;
    for (const auto& r : rows) {
        if (r.outcome == "complete") ++s.complete;
        else if (r.outcome == "infeasible") ++s.infeasible;
        else ++s.unfinished;
        if (r.selection_s) selection.push_back(*r.selection_s);
        if (r.sched_latency_s) latency.push_back(*r.sched_latency_s);
        if (r.wait_s) wait.push_back(*r.wait_s);
        if (!r.winner.empty()) winners[r.winner] = true;
        s.reselections += static_cast<std::uint64_t>(r.reselections);
        s.messages += r.messages;
    }
    s.completion_pct =
        s.jobs ? 100.0 * static_cast<double>(s.complete) / static_cast<double>(s.jobs) : 0.0;
    s.selection = dist_stats(std::move(selection));
    s.sched_latency = dist_stats(std::move(latency));
    s.wait = dist_stats(std::move(wait));
    s.entropy = leader_entropy(rows);
    s.distinct_winners = winners.size();
    return s;
}

namespace {

nlohmann::json dist_json(const DistStats& d) {
    return {{"n", d.n},     {"mean", d.mean}, {"median", d.median},
            {"p95", d.p95}, {"p99", d.p99},   {"stddev", d.stddev}};
}

DistStats dist_from(const nlohmann::json& j) {
    DistStats d;
    d.n = j.at("n").get<std::size_t>();
    d.mean = j.at("mean").get<double>();
    d.median = j.at("median").get<double>();
    d.p95 = j.at("p95").get<double>();
    d.p99 = j.at("p99").get<double>();
    d.stddev = j.at("stddev").get<double>();
    return d;
}

}  // namespace

nlohmann::json csv_summary_json(const CsvSummary& s) {
    return {{"jobs", s.jobs},
            {"complete", s.complete},
            {"infeasible", s.infeasible},
            {"unfinished", s.unfinished},
            {"completion_pct", s.completion_pct},
            {"selection_s", dist_json(s.selection)},
            {"sched_latency_s", dist_json(s.sched_latency)},
            {"wait_s", dist_json(s.wait)},
            {"leader_entropy", s.entropy},
            {"reselections", s.reselections},
            {"messages", s.messages},
            {"distinct_winners", s.distinct_winners}};
}

CsvSummary csv_summary_from_json(const nlohmann::json& j) {
    CsvSummary s;
    s.jobs = j.at("jobs").get<std::size_t>();
    s.complete = j.at("complete").get<std::size_t>();
    s.infeasible = j.at("infeasible").get<std::size_t>();
    s.unfinished = j.at("unfinished").get<std::size_t>();
    s.completion_pct = j.at("completion_pct").get<double>();
    s.selection = dist_from(j.at("selection_s"));
    s.sched_latency = dist_from(j.at("sched_latency_s"));
    s.wait = dist_from(j.at("wait_s"));
    s.entropy = j.at("leader_entropy").get<double>();
    s.reselections = j.at("reselections").get<std::uint64_t>();
    s.messages = j.at("messages").get<std::uint64_t>();
    s.distinct_winners = j.at("distinct_winners").get<std::size_t>();
    return s;
}

bool csv_summary_equal(const CsvSummary& a, const CsvSummary& b) {
    auto deq = [](const DistStats& x, const DistStats& y) {
        return x.n == y.n && x.mean == y.mean && x.median == y.median && x.p95 == y.p95 &&
               x.p99 == y.p99 && x.stddev == y.stddev;
    };
    return a.jobs == b.jobs && a.complete == b.complete && a.infeasible == b.infeasible &&
           a.unfinished == b.unfinished && a.completion_pct == b.completion_pct &&
           deq(a.selection, b.selection) && deq(a.sched_latency, b.sched_latency) &&
           deq(a.wait, b.wait) && a.entropy == b.entropy &&
           a.reselections == b.reselections && a.messages == b.messages &&
           a.distinct_winners == b.distinct_winners;
}

}  // namespace accord::harness
