#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "accord/runtime/world.hpp"

namespace accord::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A named experiment: topology, workload, cost model, failure schedule and
// repetition plan. Together with a repetition index it fully determines a
// run.
struct Scenario {
    std::string name;
    std::uint64_t seed_base = 42;
    int repetitions = 1;
    double budget_s = 0.0;  // 0 = auto
    double livelock_span_s = 120.0;
    bool long_running = false;
    std::string stop = "all_terminal";  // or "budget"

    topology::TopologySpec topo;
    workload::AgentProfileSpec profiles;
    workload::WorkloadSpec workload;
    selection::CostParams cost;
    resilience::DetectorConfig detector;
    consensus::EngineConfig engine;
    runtime::RuntimeTuning tuning;
    sim::LatencyConfig latency;
    std::vector<runtime::ScheduleEntry> schedule;

    static Scenario load(const std::string& path);
    static Scenario from_json(const nlohmann::json& j, const std::string& base_dir);

    runtime::WorldConfig world_config(int repetition, std::uint64_t seed_override = 0) const;
};

}  // namespace accord::harness
