#pragma once

#include <cstddef>
#include <stdexcept>

#include "accord/core/agent_state.hpp"
#include "accord/core/job.hpp"

namespace accord::selection {

struct Weights {
    double cpu = 0.0;
    double ram = 0.0;
    double disk = 0.0;
    double gpu = 0.0;

    double sum() const { return cpu + ram + disk + gpu; }
};

// Tunables of the cost function. Defaults follow the deployed configuration;
// per-class weights are defaults, not measured values, and every field can be
// overridden per scenario.
struct CostParams {
    Weights lightweight_weights{0.4, 0.3, 0.2, 0.1};
    Weights standard_weights{0.4, 0.3, 0.2, 0.1};
    Weights resource_intensive_weights{0.25, 0.25, 0.1, 0.4};
    // Jobs with data dependencies shift this much weight from cpu to disk.
    double data_disk_shift = 0.1;

    double beta = 1.0;     // connectivity penalty factor
    double tau_s = 20.0;   // long-job threshold, seconds
    double theta = 0.10;   // candidate threshold fraction above minimum cost
    double cache_ttl_s = 60.0;
    std::size_t cache_capacity = 65536;
    int batch = 8;  // max proposals per consensus round
    bool strict_connectivity = false;

    // Normalization factor of the long-job penalty, tied to tau by
    // definition.
    double alpha() const { return 1.0 / tau_s; }

    Weights weights_for(const Job& job) const;

    // Throws std::invalid_argument when a weight set does not sum to 1
    // within 1e-9 or a parameter is out of range.
    void validate() const;
};

// Strict mode requires a positive score on every required endpoint. In
// permissive mode (the default) missing connectivity is allowed and punished
// by the connectivity penalty instead.
bool conn_feasible(const AgentState& agent, const Job& job, const CostParams& params);

// Eq-style feasibility for leaf agents: component-wise fit on available
// resources plus connectivity feasibility. Coordinators are checked against
// their aggregated group state instead (see topology::group_feasible).
bool feasible(const AgentState& agent, const Job& job, const CostParams& params);

// 1 + beta * (1 - mean score over required DTNs); 1.0 when the job needs no
// data endpoints. Always in [1, 1+beta].
double connectivity_penalty(const AgentState& agent, const Job& job, const CostParams& params);

// alpha * (walltime - tau) past the threshold, else 0.
double long_job_penalty(const Job& job, const CostParams& params);

// Weighted utilization plus penalties. The connectivity term enters the
// penalty sum as (P_conn - 1) so perfect connectivity adds nothing.
// Requires a feasible pair; throws std::domain_error when a required
// dimension has zero availability, which feasibility filtering must have
// excluded.
double cost(const AgentState& agent, const Job& job, const CostParams& params);

}  // namespace accord::selection
