#include "accord/harness/metrics.hpp"

namespace accord::harness {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Complete:   return "complete";
        case Outcome::Infeasible: return "infeasible";
        case Outcome::Unfinished: return "unfinished";
    }
    return "unknown";
}

MetricRecord& MetricsCollector::row(const JobId& job) {
    auto it = rows_.find(job);
    if (it == rows_.end()) {
        it = rows_.emplace(job, MetricRecord{}).first;
        it->second.job_id = job;
    }
    return it->second;
}

void MetricsCollector::on_submitted(const JobId& job, SimTime at) {
    row(job).submit_t = at;
}

void MetricsCollector::on_commit(const CommitEvent& ev) {
    commits_.push_back(ev);
    if (ev.level == 0) {
        MetricRecord& r = row(ev.job);
        r.winner = ev.winner;
        r.winner_level = ev.level;
        // The winning round defines the selection interval; earlier aborted
        // attempts count toward wait time.
        r.sel_start_t = ev.started_at;
        r.sel_end_t = ev.finalized_at;
    }
}

void MetricsCollector::on_complete(const JobId& job, SimTime at) {
    MetricRecord& r = row(job);
    r.outcome = Outcome::Complete;
    r.complete_t = at;
}

void MetricsCollector::on_reset(const JobId& job) {
    ++resets_;
    row(job).reselections += 1;
}

void MetricsCollector::on_message(const JobId& job, MsgKind kind, SimTime at) {
    ++phase_counts_[static_cast<int>(kind)];
    if (job.empty()) return;
    row(job).messages += 1;
    (void)at;
}

void MetricsCollector::on_quorum_change(const QuorumObservation& obs) {
    quorum_obs_.push_back(obs);
}

void MetricsCollector::note_crash(const AgentId& agent, SimTime at) {
    crash_times_[agent] = at;
}

void MetricsCollector::add_detection(DetectionRecord rec) {
    detections_.push_back(std::move(rec));
}

bool MetricsCollector::acquire_owner(const JobId& job, const AgentId& winner) {
    auto [it, inserted] = owners_.emplace(job, winner);
    if (!inserted) {
        violations_.push_back("job " + job + " committed by " + winner +
                              " while owned by " + it->second);
        return false;
    }
    return true;
}

void MetricsCollector::release_owner(const JobId& job) { owners_.erase(job); }

void MetricsCollector::set_outcome(const JobId& job, Outcome o) { row(job).outcome = o; }

}  // namespace accord::harness
