#include "accord/core/job.hpp"

namespace accord {

const char* to_string(JobState s) {
    switch (s) {
        case JobState::Pending:    return "pending";
        case JobState::Proposed:   return "proposed";
        case JobState::Prepared:   return "prepared";
        case JobState::Committed:  return "committed";
        case JobState::Delegated:  return "delegated";
        case JobState::Running:    return "running";
        case JobState::Complete:   return "complete";
        case JobState::Failed:     return "failed";
        case JobState::Infeasible: return "infeasible";
    }
    return "unknown";
}

const char* to_string(JobClass c) {
    switch (c) {
        case JobClass::Lightweight:       return "lightweight";
        case JobClass::Standard:          return "standard";
        case JobClass::ResourceIntensive: return "resource_intensive";
    }
    return "unknown";
}

bool legal_transition(JobState from, JobState next) {
    switch (from) {
        case JobState::Pending:
            return next == JobState::Proposed || next == JobState::Infeasible;
        case JobState::Proposed:
            return next == JobState::Prepared || next == JobState::Pending;
        case JobState::Prepared:
            return next == JobState::Committed || next == JobState::Pending;
        case JobState::Committed:
            // Delegated only happens at coordinator level; Running at leaves.
            return next == JobState::Running || next == JobState::Delegated ||
                   next == JobState::Pending;
        case JobState::Delegated:
            return next == JobState::Pending;
        case JobState::Running:
            // A crashed executor sends the job back to selection; the run
            // restarts from scratch after reselection.
            return next == JobState::Complete || next == JobState::Failed ||
                   next == JobState::Pending;
        case JobState::Complete:
        case JobState::Failed:
        case JobState::Infeasible:
            return false;  // terminal
    }
    return false;
}

bool Job::try_transition(JobState next) {
    if (!legal_transition(state, next)) return false;
    state = next;
    ++version;
    return true;
}

bool Job::set_submit_time(SimTime t) {
    if (selection_start_time && t > *selection_start_time) return false;
    submit_time = t;
    ++version;
    return true;
}

bool Job::set_selection_start(SimTime t) {
    if (submit_time && t < *submit_time) return false;
    if (selection_end_time && t > *selection_end_time) return false;
    selection_start_time = t;
    ++version;
    return true;
}

bool Job::set_selection_end(SimTime t) {
    if (selection_start_time && t < *selection_start_time) return false;
    selection_end_time = t;
    ++version;
    return true;
}

std::set<DtnId> required_dtns(const Job& job) {
    std::set<DtnId> out;
    for (const auto& r : job.data_in) out.insert(r.dtn);
    for (const auto& r : job.data_out) out.insert(r.dtn);
    return out;
}

}  // namespace accord
