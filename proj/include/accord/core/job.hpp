#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "accord/core/connectivity.hpp"
#include "accord/core/resource_vector.hpp"
#include "accord/core/time.hpp"

namespace accord {

using JobId = std::string;
using AgentId = std::string;
using GroupId = std::string;

enum class JobClass { Lightweight, Standard, ResourceIntensive };

enum class JobState {
    Pending,
    Proposed,
    Prepared,
    Committed,
    Delegated,
    Running,
    Complete,
    Failed,
    Infeasible,
};

const char* to_string(JobState s);
const char* to_string(JobClass c);

inline bool is_terminal(JobState s) {
    return s == JobState::Complete || s == JobState::Failed || s == JobState::Infeasible;
}

// A (DTN endpoint, file) data dependency.
struct DataRef {
    DtnId dtn;
    std::string file;
    auto operator<=>(const DataRef&) const = default;
};

// Workload unit. Mutations go through the methods below so that the version
// counter moves on every change and the lifecycle graph stays enforced.
struct Job {
    JobId id;
    ResourceVector requirements;
    double walltime_s = 0.0;
    std::vector<DataRef> data_in;
    std::vector<DataRef> data_out;
    JobClass job_class = JobClass::Lightweight;
    JobState state = JobState::Pending;
    std::uint64_t version = 0;
    std::optional<SimTime> submit_time;
    std::optional<SimTime> selection_start_time;
    std::optional<SimTime> selection_end_time;
    std::set<GroupId> exclusions;  // groups barred from delegation

    // Applies a lifecycle transition, bumping the version. Illegal edges are
    // rejected and leave the job untouched.
    bool try_transition(JobState next);

    // Timestamp setters enforce submit <= selection_start <= selection_end.
    bool set_submit_time(SimTime t);
    bool set_selection_start(SimTime t);
    bool set_selection_end(SimTime t);

    void add_exclusion(const GroupId& g) {
        if (exclusions.insert(g).second) ++version;
    }

    // Reselection restarts the attempt; stale selection timestamps go away.
    void clear_selection_times() {
        if (selection_start_time || selection_end_time) {
            selection_start_time.reset();
            selection_end_time.reset();
            ++version;
        }
    }

    void touch() { ++version; }
};

// True iff next is a legal lifecycle edge from `from`.
bool legal_transition(JobState from, JobState next);

// Union of endpoints over data_in and data_out, deduplicated.
std::set<DtnId> required_dtns(const Job& job);

}  // namespace accord
