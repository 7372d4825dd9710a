#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "accord/core/connectivity.hpp"
#include "accord/core/job.hpp"
#include "accord/core/resource_vector.hpp"
#include "accord/core/time.hpp"

namespace accord {

using SiteId = std::string;

enum class AgentProfile { Small, Medium, Large };

const char* to_string(AgentProfile p);

// Identity, hierarchy position and resource state of one agent. Agent ids
// are zero-padded so that lexicographic order equals numeric order; the id
// order is the consensus tie-break.
struct AgentState {
    AgentId id;
    int level = 0;  // 0 = leaf / resource agent
    GroupId group_id;
    std::optional<AgentId> parent;
    std::set<AgentId> children;
    std::set<AgentId> peers;  // direct message links; equals the consensus
                              // group minus self except on ring overlays
    ResourceVector capacity;
    ResourceVector available;
    ConnectivityProfile connectivity;
    std::uint64_t version = 0;
    SimTime last_heartbeat = 0;
    bool live = true;
    SiteId site = "site0";
    AgentProfile profile = AgentProfile::Small;

    bool is_coordinator() const { return level > 0; }

    // Reserves resources for a job; fails without mutation when the job
    // does not fit the currently available vector.
    bool try_consume(const ResourceVector& req) {
        if (!fits(req, available)) return false;
        available -= req;
        ++version;
        return true;
    }

    // Returns resources after completion, clamped so available never
    // exceeds capacity.
    void release(const ResourceVector& req) {
        available += req;
        if (available.cpu > capacity.cpu) available.cpu = capacity.cpu;
        if (available.ram_gb > capacity.ram_gb) available.ram_gb = capacity.ram_gb;
        if (available.disk_gb > capacity.disk_gb) available.disk_gb = capacity.disk_gb;
        if (available.gpu > capacity.gpu) available.gpu = capacity.gpu;
        ++version;
    }

    void touch() { ++version; }
};

}  // namespace accord
