#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "accord/core/agent_state.hpp"
#include "accord/core/job.hpp"

namespace accord::workload {

// Heterogeneous agent population parameters: Small/Medium/Large capacity
// classes with fixed proportions, plus the DTN endpoint pool every profile
// draws from.
struct AgentProfileSpec {
    double small_fraction = 0.40;
    double medium_fraction = 0.25;
    double large_fraction = 0.35;
    ResourceVector small_capacity{2, 8, 100, 0};
    ResourceVector medium_capacity{4, 16, 250, 0};
    ResourceVector large_capacity{8, 32, 500, 4};
    int dtn_pool_size = 10;
    int dtn_count_min = 0;
    int dtn_count_max = 4;
    double dtn_score_min = 0.6;
    double dtn_score_max = 0.95;

    void validate() const;
    static AgentProfileSpec from_json(const nlohmann::json& j);
};

struct WorkloadSpec {
    int job_count = 100;
    double lightweight_fraction = 0.575;
    double standard_fraction = 0.275;
    double resource_intensive_fraction = 0.15;
    int size_bias_exponent = 3;  // u^3 sampling favors small jobs
    double walltime_min_s = 6.0;
    double walltime_max_s = 1800.0;
    double walltime_mean_s = 180.0;
    double submission_rate_per_s = 10.0;
    double gpu_standard_fraction = 0.10;  // Standard jobs that ask for one GPU

    void validate() const;
    static WorkloadSpec from_json(const nlohmann::json& j);
};

// Assigns capacity profiles, DTN connectivity and sites to pre-built agent
// slots. Class counts stay within +-1 of the exact proportions and each
// class is dealt across sites round-robin. Only leaf (level-0) agents get
// profiles; coordinators aggregate their children instead.
void assign_profiles(std::vector<AgentState>& agents, const AgentProfileSpec& spec,
                     std::uint64_t seed);

// Profile for one extra agent joining later, consistent with the population
// stream (index picks the deterministic draw).
AgentState make_joining_agent(const AgentId& id, const GroupId& group, const SiteId& site,
                              const AgentProfileSpec& spec, std::uint64_t seed, int index);

struct GeneratedJob {
    Job job;
    AgentId originator;
    SimTime submit_at = 0;
};

// Feasibility-aware workload: every job fits its originating agent's total
// capacity at generation time and inherits data dependencies from the
// originator's DTN set.
std::vector<GeneratedJob> generate_jobs(const WorkloadSpec& spec,
                                        const std::vector<AgentState>& population,
                                        std::uint64_t seed);

// Rate parameter of the truncated-exponential walltime distribution that
// hits the requested mean on [lo, hi] (solved numerically).
double truncated_exp_rate(double lo, double hi, double mean);

nlohmann::json population_to_json(const std::vector<AgentState>& agents);
nlohmann::json jobs_to_json(const std::vector<GeneratedJob>& jobs);

}  // namespace accord::workload
