#include "accord/selection/cost_model.hpp"

#include <cmath>
#include <string>

namespace accord::selection {

namespace {

void check_weights(const Weights& w, const char* label) {
    if (std::fabs(w.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string("weights for ") + label +
                                    " do not sum to 1.0");
    }
    if (w.cpu < 0 || w.ram < 0 || w.disk < 0 || w.gpu < 0) {
        throw std::invalid_argument(std::string("negative weight for ") + label);
    }
}

}  // namespace

Weights CostParams::weights_for(const Job& job) const {
    Weights w;
    switch (job.job_class) {
        case JobClass::Lightweight: w = lightweight_weights; break;
        case JobClass::Standard: w = standard_weights; break;
        case JobClass::ResourceIntensive: w = resource_intensive_weights; break;
    }
    if (!job.data_in.empty() || !job.data_out.empty()) {
        double shift = data_disk_shift < w.cpu ? data_disk_shift : w.cpu;
        w.cpu -= shift;
        w.disk += shift;
    }
    return w;
}

void CostParams::validate() const {
    check_weights(lightweight_weights, "lightweight");
    check_weights(standard_weights, "standard");
    check_weights(resource_intensive_weights, "resource_intensive");
    if (beta < 0) throw std::invalid_argument("beta must be >= 0");
    if (tau_s <= 0) throw std::invalid_argument("tau must be > 0");
    if (theta < 0) throw std::invalid_argument("theta must be >= 0");
    if (cache_ttl_s <= 0) throw std::invalid_argument("cache_ttl must be > 0");
    if (cache_capacity == 0) throw std::invalid_argument("cache_capacity must be > 0");
    if (batch <= 0) throw std::invalid_argument("batch must be > 0");
    if (data_disk_shift < 0) throw std::invalid_argument("data_disk_shift must be >= 0");
}

bool conn_feasible(const AgentState& agent, const Job& job, const CostParams& params) {
    if (!params.strict_connectivity) return true;
    return agent.connectivity.covers(required_dtns(job));
}

bool feasible(const AgentState& agent, const Job& job, const CostParams& params) {
    return agent.live && fits(job.requirements, agent.available) &&
           conn_feasible(agent, job, params);
}

double connectivity_penalty(const AgentState& agent, const Job& job,
                            const CostParams& params) {
    const double mean = agent.connectivity.mean_score(required_dtns(job));
    return 1.0 + params.beta * (1.0 - mean);
}

double long_job_penalty(const Job& job, const CostParams& params) {
    if (job.walltime_s <= params.tau_s) return 0.0;
    return params.alpha() * (job.walltime_s - params.tau_s);
}

namespace {

double utilization(double req, double avail) {
    if (req <= 0.0) return 0.0;  // covers the 0/0 GPU case
    if (avail <= 0.0) {
        throw std::domain_error("cost() called for an infeasible pair: "
                                "zero availability with a positive requirement");
    }
    return req / avail;
}

}  // namespace

double cost(const AgentState& agent, const Job& job, const CostParams& params) {
    const Weights w = params.weights_for(job);
    const ResourceVector& req = job.requirements;
    const ResourceVector& avail = agent.available;

    double util = w.cpu * utilization(req.cpu, avail.cpu) +
                  w.ram * utilization(req.ram_gb, avail.ram_gb) +
                  w.disk * utilization(req.disk_gb, avail.disk_gb) +
                  w.gpu * utilization(static_cast<double>(req.gpu),
                                      static_cast<double>(avail.gpu));

    double penalties = (connectivity_penalty(agent, job, params) - 1.0) +
                       long_job_penalty(job, params);
    return util + penalties;
}

}  // namespace accord::selection
