#pragma once

#include <limits>
#include <vector>

#include "accord/core/job.hpp"
#include "accord/selection/cost_model.hpp"

namespace accord::selection {

constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();

// Rows are agents, columns are jobs; +infinity marks infeasible pairs.
struct CostMatrix {
    std::vector<AgentId> rows;
    std::vector<JobId> cols;
    std::vector<double> entries;  // row-major, rows.size() * cols.size()

    void resize() { entries.assign(rows.size() * cols.size(), kInfeasibleCost); }

    double at(std::size_t r, std::size_t c) const { return entries[r * cols.size() + c]; }
    void set(std::size_t r, std::size_t c, double v) { entries[r * cols.size() + c] = v; }
};

struct Candidate {
    AgentId agent;
    JobId job;
    double cost = 0.0;
};

struct CandidateResult {
    // Up to `batch` (self, job, cost) pairs, ascending by (cost, job id).
    std::vector<Candidate> selected;
    // Jobs whose whole column is infeasible; no live agent can take them.
    std::vector<JobId> infeasible_jobs;
};

// Threshold-based self-nomination: for each job with finite minimum cost c*,
// self is a candidate iff its own cost is <= (1 + theta) * c*.
CandidateResult select_candidates(const CostMatrix& matrix, const AgentId& self,
                                  const CostParams& params, int batch);

}  // namespace accord::selection
