#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_set>
#include <vector>

#include "accord/consensus/engine.hpp"
#include "accord/core/agent_state.hpp"
#include "accord/harness/metrics.hpp"
#include "accord/resilience/detector.hpp"
#include "accord/selection/candidate.hpp"
#include "accord/selection/cost_cache.hpp"
#include "accord/selection/cost_model.hpp"
#include "accord/sim/clock.hpp"
#include "accord/sim/store.hpp"
#include "accord/sim/trace.hpp"
#include "accord/sim/transport.hpp"
#include "accord/topology/topology.hpp"

namespace accord::runtime {

// Knobs of the per-agent scheduling loop and the modelled compute costs.
// Service times are what turn message complexity into simulated latency
// under load.
struct RuntimeTuning {
    double tick_interval_ms = 100.0;
    double delegation_timeout_s = 30.0;
    double aggregation_refresh_s = 5.0;
    double msg_service_us = 500.0;       // per consensus message handled
    double tick_service_us = 200.0;      // per selection pass
    double cost_eval_service_us = 1.0;   // per uncached cost evaluation
    double store_op_service_us = 100.0;  // server-side work per op bundle
    // A pending job must stay capacity-infeasible across every live group
    // member for this long before it is declared Infeasible; transients
    // (cold aggregates, agents between heartbeats) never last this long.
    double infeasible_confirm_s = 20.0;
};

struct WorldContext {
    sim::SimClock& clock;
    sim::LatencyModel& latency;
    sim::SharedStore& store;
    sim::Transport& transport;
    harness::MetricsCollector& metrics;
    sim::TraceSink& trace;
};

// One agent: sequential task processing over a single inbox, a consensus
// engine, a failure detector, a cost cache and the store frontend. All
// cross-agent interaction goes through the transport and the shared store.
class AgentRuntime {
public:
    AgentRuntime(AgentState initial, topology::GroupInfo group, bool top_level,
                 std::optional<GroupId> child_group, WorldContext ctx, RuntimeTuning tuning,
                 selection::CostParams cost_params, resilience::DetectorConfig detector_cfg,
                 consensus::EngineConfig engine_cfg);

    void start();
    void crash();
    bool crashed() const { return crashed_; }

    // transport-facing entry points
    void deliver_envelope(const sim::Envelope& env);
    void channel_event(const AgentId& peer, bool up, SimTime at);

    const AgentState& state() const { return self_; }
    const resilience::FailureDetector& detector() const { return detector_; }
    const consensus::Engine& engine() const { return *engine_; }
    const selection::CostCache& cost_cache() const { return cache_; }

    // Current adaptive quorum over the live consensus membership.
    consensus::QuorumView quorum_view() const;

private:
    struct JobView {
        std::shared_ptr<const Job> job;
        AgentId winner;
        GroupId pool;
        int reselections = 0;
        // Peer decision seen before the store confirms it. The overlay
        // expires: a commit quorum whose CAS never lands (loser of a race,
        // or a winner that could no longer host the job) must not shadow a
        // still-pending record forever.
        SimTime taken_overlay_until = -1;
    };

    bool view_selectable(const JobView& v, SimTime now) const {
        return v.job && v.job->state == JobState::Pending && v.winner.empty() &&
               v.taken_overlay_until <= now;
    }

    struct MemberView {
        AgentState agent;  // reconstructed from the heartbeat
        GroupId child_group;
        int level = 0;
    };

    struct RefreshResult {
        sim::SharedStore::HeartbeatDelta own_hb;
        sim::SharedStore::HeartbeatDelta child_hb;
        sim::SharedStore::PoolDelta own_pool;
        sim::SharedStore::PoolDelta child_pool;
        std::vector<sim::StoredDelegation> delegations;
        std::vector<sim::JobRecord> watched;
    };

    // --- task queue: strict per-agent serialization with service times ----
    struct Task {
        std::function<SimDuration()> fn;  // returns extra service time
        SimDuration base_service = 0;
    };
    void enqueue(Task t);
    void pump();
    void process_one();

    // --- periodic work ----------------------------------------------------
    void schedule_tick(SimDuration delay);
    void do_tick();
    void schedule_heartbeat(SimDuration delay);
    void write_heartbeat();
    void issue_refresh();
    SimDuration apply_refresh(RefreshResult res);

    // --- selection & consensus -------------------------------------------
    SimDuration run_selection();
    double entry_cost(const AgentState& row, const GroupId& row_child_group,
                      const JobView& view, std::uint64_t* evals);
    void handle_win(const consensus::ProposalRecord& rec);
    void handle_peer_decided(const consensus::ProposalRecord& rec);
    consensus::JobGate job_gate(const JobId& id) const;

    // --- resilience --------------------------------------------------------
    void on_members_died(const std::vector<AgentId>& died);
    void reselect_jobs_of(const AgentId& dead);
    void mark_infeasible_jobs();

    // --- coordinator duties -------------------------------------------------
    void refresh_aggregate(bool changed);
    void monitor_delegations_now();
    void reclaim_job(const sim::JobRecord& rec, const topology::DelegationRecord& del,
                     std::uint64_t del_version);

    // --- store frontend -----------------------------------------------------
    void store_cas_job(const JobId& id, std::optional<std::uint64_t> expected,
                       sim::JobRecord next, std::function<void(sim::CasOutcome)> done);
    SimDuration store_rtt() const;

    void broadcast(const ConsensusMessage& msg);
    bool is_live_member(const AgentId& id) const;
    std::vector<AgentId> live_members() const;
    bool smallest_live_member() const;

    AgentState self_;
    topology::GroupInfo group_;
    bool top_level_;
    std::optional<GroupId> child_group_;
    WorldContext ctx_;
    RuntimeTuning tuning_;
    selection::CostParams cost_params_;
    resilience::DetectorConfig detector_cfg_;
    resilience::FailureDetector detector_;
    std::unique_ptr<consensus::Engine> engine_;
    selection::CostCache cache_;

    bool crashed_ = false;
    bool started_ = false;

    // task queue
    std::deque<Task> inbox_;
    bool process_scheduled_ = false;
    SimTime busy_until_ = 0;

    // views
    std::map<JobId, JobView> pool_view_;
    std::map<AgentId, MemberView> members_;   // own consensus group
    std::map<AgentId, MemberView> children_;  // managed child group
    std::map<JobId, sim::JobRecord> child_jobs_;  // child pool mirror
    std::uint64_t own_hb_seq_ = 0, child_hb_seq_ = 0;
    std::uint64_t own_pool_seq_ = 0, child_pool_seq_ = 0;
    bool refresh_inflight_ = false;

    // running jobs: committed work awaiting its walltime
    struct RunningJob {
        std::uint64_t version;
        ResourceVector req;
    };
    std::map<JobId, RunningJob> running_;

    // delegation mirror (coordinators)
    std::map<JobId, sim::StoredDelegation> delegations_;
    std::map<JobId, bool> delegation_progress_seen_;

    // aggregation bookkeeping
    SimTime last_aggregate_at_ = -1;
    ResourceVector agg_total_capacity_;
    std::map<JobId, SimTime> infeasible_since_;

    // relay (ring) support
    std::uint64_t relay_counter_ = 0;
    std::unordered_set<std::uint64_t> relay_seen_;
    std::deque<std::pair<SimTime, std::uint64_t>> relay_seen_order_;

    int last_quorum_q_ = -1;
    int last_quorum_n_ = -1;
};

}  // namespace accord::runtime
