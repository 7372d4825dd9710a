#include "accord/harness/runner.hpp"

#include <algorithm>
#include <cmath>

namespace accord::harness {

namespace {

nlohmann::json detection_section(const std::vector<DetectionRecord>& recs) {
    std::vector<double> fast, fallback;
    for (const auto& r : recs) {
        if (r.channel_signal_at) {
            fast.push_back(to_seconds(*r.channel_signal_at - r.crashed_at));
        }
        if (r.heartbeat_expiry_at) {
            fallback.push_back(to_seconds(*r.heartbeat_expiry_at - r.crashed_at));
        }
    }
    auto fstats = dist_stats(fast);
    auto bstats = dist_stats(fallback);
    double ratio = (fstats.n && bstats.n && fstats.mean > 0) ? bstats.mean / fstats.mean : 0.0;
    return {{"pairs", recs.size()},
            {"fast_path_s", {{"n", fstats.n}, {"mean", fstats.mean}, {"p95", fstats.p95}}},
            {"fallback_s", {{"n", bstats.n}, {"mean", bstats.mean}, {"p95", bstats.p95}}},
            {"fallback_over_fast_ratio", ratio}};
}

// Recovery time: first 30 s sliding window after the crash whose commit rate
// is back within 10% of the pre-crash window's rate.
nlohmann::json recovery_section(const std::vector<CommitEvent>& commits,
                                const std::map<AgentId, SimTime>& crashes, SimTime end_time) {
    if (crashes.empty()) return nullptr;
    SimTime first_crash = crashes.begin()->second;
    for (const auto& [a, t] : crashes) first_crash = std::min(first_crash, t);

    const double window_s = 30.0;
    std::vector<double> times;
    for (const auto& c : commits) {
        if (c.level == 0) times.push_back(to_seconds(c.finalized_at));
    }
    std::sort(times.begin(), times.end());
    auto rate_in = [&](double from, double to) {
        auto lo = std::lower_bound(times.begin(), times.end(), from);
        auto hi = std::lower_bound(times.begin(), times.end(), to);
        return static_cast<double>(hi - lo) / (to - from);
    };
    const double crash_s = to_seconds(first_crash);
    const double baseline = rate_in(std::max(0.0, crash_s - window_s), crash_s);
    nlohmann::json out{{"first_crash_s", crash_s}, {"baseline_rate_per_s", baseline}};
    if (baseline <= 0) {
        out["recovery_s"] = nullptr;
        return out;
    }
    for (double t = crash_s; t + window_s <= to_seconds(end_time); t += 1.0) {
        if (rate_in(t, t + window_s) >= 0.9 * baseline) {
            out["recovery_s"] = t - crash_s;
            return out;
        }
    }
    out["recovery_s"] = nullptr;
    return out;
}

}  // namespace

std::vector<std::string> audit_cas_log(const std::vector<sim::CasLogEntry>& log) {
    std::vector<std::string> violations;
    std::map<JobId, int> commits_this_epoch;
    for (const auto& e : log) {
        if (!e.ok) continue;
        const bool exec_commit =
            e.from_state == JobState::Pending &&
            (e.to_state == JobState::Running || e.to_state == JobState::Committed) &&
            e.from_pool == e.to_pool;
        const bool reset = e.to_state == JobState::Pending &&
                           (e.from_state == JobState::Committed ||
                            e.from_state == JobState::Running);
        if (exec_commit) {
            int& n = commits_this_epoch[e.job];
            if (++n > 1) {
                violations.push_back("job " + e.job + ": " + std::to_string(n) +
                                     " commits within one selection epoch");
            }
        } else if (reset) {
            commits_this_epoch[e.job] = 0;
        }
    }
    return violations;
}

RepResult run_scenario(const Scenario& sc, int repetition, std::uint64_t seed_override,
                       const runtime::RunOptions& opts) {
    runtime::WorldConfig cfg = sc.world_config(repetition, seed_override);
    runtime::World world(std::move(cfg));
    RepResult out;
    out.report = world.run(opts);

    const auto& metrics = world.metrics();
    out.csv = render_csv(metrics.rows());
    auto parsed = parse_csv(out.csv);
    out.csv_summary = summarize_csv(parsed);

    // event-derived sections
    std::map<int, std::vector<double>> sel_by_level;
    for (const auto& c : metrics.commits()) {
        out.commits_by_level[c.level] += 1;
        sel_by_level[c.level].push_back(to_seconds(c.finalized_at - c.started_at));
    }
    std::vector<double> all_sel;
    nlohmann::json levels = nlohmann::json::array();
    for (auto& [level, v] : sel_by_level) {
        auto st = dist_stats(v);
        out.selection_mean_by_level_s[level] = st.mean;
        levels.push_back({{"level", level},
                          {"commits", v.size()},
                          {"selection_mean_s", st.mean},
                          {"selection_p95_s", st.p95}});
        all_sel.insert(all_sel.end(), v.begin(), v.end());
    }
    auto all_st = dist_stats(all_sel);
    out.selection_mean_all_levels_s = all_st.mean;
    out.messages_total = metrics.total_messages();

    // participation: fraction of final live leaves that won at least one job
    std::set<AgentId> winners;
    for (const auto& c : metrics.commits()) {
        if (c.level == 0) winners.insert(c.winner);
    }
    auto agents = world.agent_summaries();
    int final_leaves = 0, winning_leaves = 0;
    for (const auto& a : agents) {
        if (a.level != 0 || a.crashed) continue;
        ++final_leaves;
        if (winners.count(a.id)) ++winning_leaves;
    }
    out.participation_rate =
        final_leaves ? static_cast<double>(winning_leaves) / final_leaves : 0.0;

    // audits
    out.cas_violations = audit_cas_log(world.store().cas_log());

    const auto& crashes = metrics.crash_times();
    const double detect_bound_s = sc.detector.heartbeat_threshold_s * 1.1 +
                                  sc.detector.heartbeat_interval_s + 5.0;
    for (const auto& gen : world.jobs()) {
        auto rec = world.store().read_job(gen.job.id);
        if (!rec) continue;
        const bool incomplete = rec->job.state != JobState::Complete;
        if (incomplete) {
            for (const auto& a : agents) {
                if (a.level != 0 || a.crashed) continue;
                bool cap_ok = fits(rec->job.requirements, a.capacity);
                bool conn_ok = !sc.cost.strict_connectivity ||
                               a.connectivity.covers(required_dtns(rec->job));
                if (cap_ok && conn_ok) {
                    out.feasibility_violations.push_back(gen.job.id + " fits " + a.id);
                    break;
                }
            }
        }
        if ((rec->job.state == JobState::Committed || rec->job.state == JobState::Running) &&
            !rec->winner.empty()) {
            auto cit = crashes.find(rec->winner);
            if (cit != crashes.end() &&
                to_seconds(out.report.end_time - cit->second) > detect_bound_s) {
                out.orphan_violations.push_back(gen.job.id + " orphaned on crashed " +
                                                rec->winner);
            }
        }
    }

    auto detections = world.harvest_detections();

    nlohmann::json summary;
    summary["scenario"] = sc.name;
    summary["repetition"] = repetition;
    summary["seed"] = (seed_override ? seed_override : sc.seed_base) +
                      static_cast<std::uint64_t>(repetition);
    summary["csv_stats"] = csv_summary_json(out.csv_summary);
    summary["events"] = {
        {"selection_mean_all_levels_s", out.selection_mean_all_levels_s},
        {"per_level", levels},
        {"messages", {{"proposal", metrics.messages_by_phase(MsgKind::Proposal)},
                      {"prepare", metrics.messages_by_phase(MsgKind::Prepare)},
                      {"commit", metrics.messages_by_phase(MsgKind::Commit)},
                      {"total", metrics.total_messages()}}},
        {"cas_conflicts", metrics.cas_conflicts},
        {"reclaims", metrics.reclaims},
        {"resets", metrics.resets()},
        {"infeasible_marks", metrics.infeasible_marks},
    };
    summary["participation"] = {{"final_leaves", final_leaves},
                                {"winning_leaves", winning_leaves},
                                {"rate", out.participation_rate}};
    if (!crashes.empty()) {
        summary["resilience"] = {
            {"crashes", crashes.size()},
            {"detection", detection_section(detections)},
            {"recovery", recovery_section(metrics.commits(), crashes, out.report.end_time)},
        };
    }
    summary["audits"] = {{"cas", out.cas_violations},
                         {"orphans", out.orphan_violations},
                         {"incomplete_feasible_on_survivor", out.feasibility_violations},
                         {"safety_violations", metrics.violations()}};
    summary["run"] = {{"end_time_s", to_seconds(out.report.end_time)},
                      {"events", out.report.events},
                      {"trace_hash", out.report.trace_hash},
                      {"livelock_aborted", out.report.livelock_aborted},
                      {"diagnostic", out.report.diagnostic}};
    out.summary = std::move(summary);
    return out;
}

CompareRow summarize_reps(const Scenario& sc, const std::vector<RepResult>& reps) {
    CompareRow row;
    row.name = sc.name;
    row.repetitions = static_cast<int>(reps.size());
    std::vector<double> sel;
    double completion = 0, msgs = 0;
    for (const auto& r : reps) {
        sel.push_back(r.csv_summary.selection.mean);
        completion += r.csv_summary.completion_pct;
        msgs += static_cast<double>(r.messages_total);
    }
    auto st = dist_stats(sel);
    row.selection_mean_s = st.mean;
    row.selection_std_s = st.stddev;
    if (!reps.empty()) {
        row.completion_pct = completion / static_cast<double>(reps.size());
        row.messages_per_job =
            msgs / static_cast<double>(reps.size()) / std::max(1, sc.workload.job_count);
    }
    return row;
}

}  // namespace accord::harness
