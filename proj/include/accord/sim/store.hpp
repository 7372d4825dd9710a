#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "accord/core/agent_state.hpp"
#include "accord/core/job.hpp"
#include "accord/topology/topology.hpp"

namespace accord::sim {

// Authoritative job entry. The embedded job's version is the record version
// that compare-and-set checks against.
struct JobRecord {
    Job job;
    AgentId winner;   // empty while unassigned
    GroupId pool;     // namespace the record currently lives in
    int reselections = 0;
};

// Periodic agent state advertisement; the first write registers the agent.
struct HeartbeatRecord {
    AgentId id;
    int level = 0;
    GroupId group;
    SiteId site;
    SimTime written_at = 0;
    std::uint64_t agent_version = 0;
    ResourceVector available;
    ResourceVector capacity;
    ConnectivityProfile connectivity;
    bool departed = false;  // tombstone for permanently removed agents
    // coordinators only: which group they manage
    GroupId child_group;
};

struct StoredDelegation {
    topology::DelegationRecord record;
    AgentId owner;  // monitoring coordinator
    std::uint64_t version = 0;
};

struct CasOutcome {
    bool ok = false;
    std::uint64_t current_version = 0;  // version found in the store
};

// One line of the append-only CAS audit trail.
struct CasLogEntry {
    SimTime at = 0;
    JobId job;
    AgentId caller;
    std::uint64_t expected = 0;
    bool ok = false;
    JobState from_state = JobState::Pending;
    JobState to_state = JobState::Pending;
    GroupId from_pool;
    GroupId to_pool;
};

// Linearizable in-memory key-value state shared by all agents, organized in
// group-scoped namespaces. The simulation is single-threaded, so every
// operation applies atomically at its issue time; access latency is modelled
// by the store frontend, not here.
class SharedStore {
public:
    // --- jobs ---------------------------------------------------------
    // expected == nullopt creates the record iff the key is absent.
    CasOutcome cas_job(const JobId& id, std::optional<std::uint64_t> expected,
                       JobRecord next, const AgentId& caller, SimTime now);

    std::optional<JobRecord> read_job(const JobId& id) const;

    struct PoolDelta {
        std::vector<JobRecord> changed;  // current state of touched records
        std::uint64_t upto = 0;
    };
    // Records touched in the pool namespace after `since` (exclusive).
    // Records that left the pool still appear once so scanners can drop them.
    PoolDelta scan_pool(const GroupId& pool, std::uint64_t since) const;

    // --- heartbeats ----------------------------------------------------
    void put_heartbeat(HeartbeatRecord rec);

    struct HeartbeatDelta {
        std::vector<HeartbeatRecord> changed;
        std::uint64_t upto = 0;
    };
    HeartbeatDelta scan_heartbeats(const GroupId& group, std::uint64_t since) const;

    // --- delegations (namespace = delegating coordinator's group) -------
    CasOutcome cas_delegation(const GroupId& ns, const JobId& job,
                              std::optional<std::uint64_t> expected,
                              std::optional<StoredDelegation> next);
    // Unconditional write (creates or replaces); ordering is already
    // serialized through the job CAS that precedes every delegation.
    void put_delegation(const GroupId& ns, const JobId& job, StoredDelegation rec);
    std::vector<StoredDelegation> scan_delegations(const GroupId& ns) const;

    // --- audit -----------------------------------------------------------
    const std::vector<CasLogEntry>& cas_log() const { return cas_log_; }
    std::uint64_t job_count() const { return jobs_.size(); }
    std::vector<JobRecord> all_jobs() const;

private:
    struct PoolLog {
        std::vector<std::pair<std::uint64_t, JobId>> entries;
    };

    void log_pool_touch(const GroupId& pool, const JobId& id);

    std::map<JobId, JobRecord> jobs_;
    std::map<GroupId, PoolLog> pool_logs_;
    std::uint64_t pool_seq_ = 0;

    std::map<GroupId, std::map<AgentId, HeartbeatRecord>> heartbeats_;
    std::map<GroupId, std::vector<std::pair<std::uint64_t, AgentId>>> hb_logs_;
    std::uint64_t hb_seq_ = 0;

    std::map<GroupId, std::map<JobId, StoredDelegation>> delegations_;

    std::vector<CasLogEntry> cas_log_;
};

}  // namespace accord::sim
