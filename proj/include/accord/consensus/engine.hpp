#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "accord/core/agent_state.hpp"
#include "accord/core/message.hpp"

namespace accord::consensus {

// Adaptive quorum per the live membership: q = ceil((n_live + 1) / 2).
inline int quorum_size(int n_live) { return (n_live + 2) / 2; }

struct QuorumView {
    int n_live = 1;
    int q = 1;
};

enum class Phase { Proposing, Preparing, Committing, Done, Aborted };
enum class Direction { Outgoing, Incoming };

const char* to_string(Phase p);

struct ProposalRecord {
    ProposalId id;
    JobId job_id;
    AgentId proposer;
    double cost = 0.0;
    Phase phase = Phase::Proposing;
    Direction direction = Direction::Incoming;
    std::set<AgentId> prepare_votes;
    std::set<AgentId> commit_votes;
    SimTime started_at = 0;
    SimTime phase_entered_at = 0;
    bool endorsed = false;          // this agent broadcast a prepare for it
    bool commit_broadcast = false;  // commit sent at most once
    std::shared_ptr<const Job> job;

    bool active() const { return phase != Phase::Done && phase != Phase::Aborted; }
};

// (cost, proposer id) ordering: lower cost wins, lexicographically smaller
// agent id breaks ties.
inline bool proposal_beats(double cost_a, const AgentId& a, double cost_b, const AgentId& b) {
    if (cost_a != cost_b) return cost_a < cost_b;
    return a < b;
}

struct EngineConfig {
    int batch = 8;
    double phase_timeout_s = 10.0;
    double ooo_buffer_s = 2.0;   // out-of-order message window
    double prune_after_s = 30.0; // retention of Done/Aborted tombstones
};

// What the validator's pool view says about a job when a proposal arrives.
enum class JobGate {
    Acceptable,  // pending or unknown here (proposal carries the body)
    Taken,       // assigned or terminal: reject
};

struct EngineStats {
    std::uint64_t proposals_sent = 0;
    std::uint64_t prepares_sent = 0;
    std::uint64_t commits_sent = 0;
    std::uint64_t early_aborts = 0;
    std::uint64_t timeout_aborts = 0;
    std::uint64_t stale_messages = 0;
    std::uint64_t foreign_votes_ignored = 0;
    std::uint64_t buffered_dropped = 0;
    std::uint64_t rejects = 0;
};

// Per-agent three-phase consensus state machine. Transport-agnostic: all
// effects go through the hooks, which makes the protocol logic scriptable in
// tests. The owner must call on_message for every consensus message and
// tick() at its scheduling cadence.
class Engine {
public:
    struct Hooks {
        std::function<void(const ConsensusMessage&)> broadcast;
        // Proposer side won the round: runtime takes it through the store.
        std::function<void(const ProposalRecord&)> on_win;
        // A peer's proposal finalized: runtime records the decision.
        std::function<void(const ProposalRecord&)> on_peer_decided;
        // Own proposal aborted (conflict or timeout): job is selectable again.
        std::function<void(const JobId&, Phase)> on_own_abort;
        std::function<QuorumView()> quorum;
        std::function<bool(const AgentId&)> is_member;
        std::function<JobGate(const JobId&)> job_gate;
    };

    Engine(AgentId self, EngineConfig cfg, Hooks hooks);

    // Starts outgoing rounds for up to `cfg.batch` candidate jobs. Jobs that
    // already have an active outgoing proposal are skipped. Returns the
    // records actually created.
    std::vector<const ProposalRecord*> propose(
        const std::vector<std::pair<std::shared_ptr<const Job>, double>>& candidates,
        SimTime now);

    void on_message(const ConsensusMessage& msg, SimTime now);

    // Phase timeouts, buffered-message expiry, tombstone pruning.
    void tick(SimTime now);

    // Best active proposal known for a job, if any.
    const ProposalRecord* best_active(const JobId& job) const;
    bool has_outgoing(const JobId& job) const;
    std::size_t outstanding_outgoing() const { return outgoing_by_job_.size(); }

    const EngineStats& stats() const { return stats_; }
    const std::map<ProposalId, ProposalRecord>& records() const { return records_; }

private:
    ProposalRecord& create_record(const ConsensusMessage& msg, Direction dir, SimTime now);
    void advance(ProposalRecord& rec, SimTime now);
    void abort_own(ProposalRecord& rec, SimTime now, bool timeout);
    void handle_proposal(const ConsensusMessage& msg, SimTime now);
    void handle_vote(const ConsensusMessage& msg, SimTime now);
    void drain_buffered(const ProposalId& pid, SimTime now);

    AgentId self_;
    EngineConfig cfg_;
    Hooks hooks_;
    std::uint64_t next_counter_ = 0;

    std::map<ProposalId, ProposalRecord> records_;
    std::map<JobId, ProposalId> outgoing_by_job_;
    std::map<ProposalId, std::vector<std::pair<ConsensusMessage, SimTime>>> buffered_;
    EngineStats stats_;
};

}  // namespace accord::consensus
