#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "accord/runtime/agent.hpp"
#include "accord/workload/generator.hpp"

namespace accord::runtime {

struct ScheduleEntry {
    enum class Kind { Crash, Join, Partition, Delay };
    Kind kind = Kind::Crash;
    AgentId agent;  // crash target
    int count = 1;  // join batch size
    GroupId group;  // join target group
    SiteId site;    // join placement (defaults to the group's site)
    AgentId a, b;   // partition / delay endpoints
    double at_s = 0.0;
    double until_s = 0.0;
    double extra_ms = 0.0;
};

// Everything one repetition needs. Fully determines the run together with
// the seed.
struct WorldConfig {
    topology::TopologySpec topo;
    workload::AgentProfileSpec profiles;
    workload::WorkloadSpec workload;
    selection::CostParams cost;
    resilience::DetectorConfig detector;
    consensus::EngineConfig engine;
    RuntimeTuning tuning;
    sim::LatencyConfig latency;
    std::vector<ScheduleEntry> schedule;
    double budget_s = 0.0;        // 0 = 2 s per job + 300 s floor
    double livelock_span_s = 120.0;
    std::uint64_t seed = 1;
};

struct RunOptions {
    bool realtime = false;     // wall-clock paced soak mode
    double time_scale = 1.0;   // simulated seconds per wall second
    std::ostream* trace_out = nullptr;
};

struct RunReport {
    SimTime end_time = 0;
    std::uint64_t events = 0;
    std::uint64_t trace_hash = 0;
    bool livelock_aborted = false;
    bool safety_violated = false;
    std::string diagnostic;
};

// Builds agents, workload and fault schedule from a config and drives the
// event loop to completion. Single-threaded by contract.
class World {
public:
    explicit World(WorldConfig cfg);
    ~World();

    RunReport run(const RunOptions& opts = {});

    harness::MetricsCollector& metrics() { return metrics_; }
    const sim::SharedStore& store() const { return store_; }
    const topology::Topology& topo() const { return topo_; }
    const std::vector<workload::GeneratedJob>& jobs() const { return jobs_; }
    sim::TraceSink& trace() { return trace_; }

    // Final agent population (initial plus joined), with crash flags.
    struct AgentSummary {
        AgentId id;
        int level = 0;
        GroupId group;
        bool crashed = false;
        ResourceVector capacity;
        ConnectivityProfile connectivity;
    };
    std::vector<AgentSummary> agent_summaries() const;
    int surviving_leaves() const;

    // Detection-latency records harvested from the surviving observers.
    std::vector<harness::DetectionRecord> harvest_detections() const;

private:
    void build_agents();
    void add_agent(AgentState state, bool start_now);
    void open_group_channels(const topology::GroupInfo& g);
    void schedule_submissions();
    void schedule_faults();
    void drain_cas_log();
    int group_level(const GroupId& g) const;

    WorldConfig cfg_;
    sim::SimClock clock_;
    sim::LatencyModel latency_;
    sim::SharedStore store_;
    sim::Transport transport_;
    sim::TraceSink trace_;
    harness::MetricsCollector metrics_;
    topology::Topology topo_;
    std::vector<workload::GeneratedJob> jobs_;
    std::map<AgentId, std::unique_ptr<AgentRuntime>> agents_;
    std::map<GroupId, std::vector<AgentId>> group_members_;  // grows on join
    std::size_t cas_cursor_ = 0;
    std::size_t terminal_jobs_ = 0;
    SimTime last_progress_ = 0;
    std::size_t running_owners_ = 0;
    int join_counter_ = 0;
};

}  // namespace accord::runtime
