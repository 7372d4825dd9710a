#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "accord/core/job.hpp"
#include "accord/core/message.hpp"
#include "accord/core/time.hpp"

namespace accord::harness {

enum class Outcome { Complete, Infeasible, Unfinished };

const char* to_string(Outcome o);

// Per-job timing and outcome row; exported to CSV at run end.
struct MetricRecord {
    JobId job_id;
    std::optional<SimTime> submit_t;
    std::optional<SimTime> sel_start_t;
    std::optional<SimTime> sel_end_t;
    AgentId winner;
    int winner_level = -1;
    Outcome outcome = Outcome::Unfinished;
    int reselections = 0;
    std::uint64_t messages = 0;
    std::optional<SimTime> complete_t;
};

// One successful consensus finalization (execution win at level 0,
// delegation win at higher levels).
struct CommitEvent {
    JobId job;
    AgentId winner;
    int level = 0;
    SimTime started_at = 0;
    SimTime finalized_at = 0;
};

struct QuorumObservation {
    AgentId agent;
    SimTime at = 0;
    int n_live = 0;
    int q = 0;
};

// Both failure-detection signal paths for one (observer, dead peer) pair.
struct DetectionRecord {
    AgentId observer;
    AgentId peer;
    SimTime crashed_at = 0;
    std::optional<SimTime> channel_signal_at;     // fast path
    std::optional<SimTime> heartbeat_expiry_at;   // fallback path
    std::optional<SimTime> declared_at;
};

// Run-wide counters and event streams. Fed by the world while a simulation
// runs; the safety assertion on commits lives here.
class MetricsCollector {
public:
    void on_submitted(const JobId& job, SimTime at);
    void on_commit(const CommitEvent& ev);
    void on_complete(const JobId& job, SimTime at);
    void on_reset(const JobId& job);          // reselection or reclaim
    void on_message(const JobId& job, MsgKind kind, SimTime at);
    void on_quorum_change(const QuorumObservation& obs);
    void note_crash(const AgentId& agent, SimTime at);
    void add_detection(DetectionRecord rec);

    // Commit-safety assertion: a job may gain an execution owner only when
    // it has none. Returns false (and records the violation) on conflict.
    bool acquire_owner(const JobId& job, const AgentId& winner);
    void release_owner(const JobId& job);

    void set_outcome(const JobId& job, Outcome o);
    MetricRecord& row(const JobId& job);

    const std::map<JobId, MetricRecord>& rows() const { return rows_; }
    const std::vector<CommitEvent>& commits() const { return commits_; }
    const std::vector<QuorumObservation>& quorum_observations() const { return quorum_obs_; }
    const std::vector<DetectionRecord>& detections() const { return detections_; }
    const std::map<AgentId, SimTime>& crash_times() const { return crash_times_; }

    std::uint64_t messages_by_phase(MsgKind k) const {
        return phase_counts_[static_cast<int>(k)];
    }
    std::uint64_t total_messages() const {
        return phase_counts_[0] + phase_counts_[1] + phase_counts_[2];
    }
    std::uint64_t resets() const { return resets_; }
    std::uint64_t cas_conflicts = 0;
    std::uint64_t reclaims = 0;
    std::uint64_t infeasible_marks = 0;

    bool safety_violated() const { return !violations_.empty(); }
    const std::vector<std::string>& violations() const { return violations_; }
    void add_violation(std::string what) { violations_.push_back(std::move(what)); }

private:
    std::map<JobId, MetricRecord> rows_;
    std::vector<CommitEvent> commits_;
    std::vector<QuorumObservation> quorum_obs_;
    std::vector<DetectionRecord> detections_;
    std::map<AgentId, SimTime> crash_times_;
    std::map<JobId, AgentId> owners_;
    std::uint64_t phase_counts_[3] = {0, 0, 0};
    std::uint64_t resets_ = 0;
    std::vector<std::string> violations_;
};

}  // namespace accord::harness
