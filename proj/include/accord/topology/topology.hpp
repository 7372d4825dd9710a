#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "accord/core/agent_state.hpp"
#include "accord/core/connectivity.hpp"
#include "accord/core/job.hpp"

namespace accord::topology {

enum class TopologyKind { Mesh, Ring, Hierarchical };

const char* to_string(TopologyKind k);

struct LevelSpec {
    int level = 0;
    int group_count = 0;
    int group_size = 0;
};

struct RingParams {
    int ring_count = 0;
    int ring_size = 0;
    int cross_link_count = 1;  // bridge agents per ring
};

struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TopologySpec {
    TopologyKind kind = TopologyKind::Mesh;
    int total_agents = 0;
    std::vector<LevelSpec> levels;  // hierarchical only, level 0 first
    RingParams ring_params;
    std::map<AgentId, SiteId> site_map;  // explicit placement, optional

    // Throws InvalidSpec when counts are inconsistent.
    void validate() const;

    static TopologySpec from_json(const nlohmann::json& j);
};

struct GroupInfo {
    GroupId id;
    int level = 0;
    std::vector<AgentId> members;  // sorted by id
    // Coordinator that delegates into this group (absent for the top group
    // and for flat topologies).
    std::optional<AgentId> parent_coordinator;
    // True when members reach each other only through multi-hop links, so
    // consensus traffic must be relayed (ring overlays).
    bool relay = false;
};

struct Topology {
    TopologyKind kind = TopologyKind::Mesh;
    std::vector<AgentState> agents;  // sorted by id
    std::map<GroupId, GroupInfo> groups;
    GroupId top_group;  // pool that receives submitted jobs
    std::map<AgentId, GroupId> child_group_of;  // coordinator -> group it manages

    const AgentState* find(const AgentId& id) const;
};

// Builds agents with levels, groups, parents, children and peer sets.
// Mesh: every agent peers with all others. Ring: peers are ring neighbours
// plus bridge cross-links; the whole overlay shares one job pool. Hier:
// level-0 peers are the own group, coordinator peers the sibling
// coordinators.
Topology build_topology(const TopologySpec& spec);

// Parent-side aggregation of a child group.
struct AggregatedGroupState {
    GroupId group_id;
    ResourceVector max_capacity;        // component-wise max of live children's available
    ResourceVector max_total_capacity;  // same over total capacity, for feasibility audits
    ConnectivityProfile dtn_union;      // max score per endpoint over live children
    int member_count = 0;
    std::uint64_t as_of_version = 0;
};

struct EmptyGroup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Throws EmptyGroup when no child is live.
AggregatedGroupState aggregate_children(const GroupId& group,
                                        const std::vector<const AgentState*>& children);

// Optimistic group-level feasibility: fits against the aggregated maxima and
// every required endpoint reachable by at least one child. May say yes when
// no single child satisfies all dimensions jointly; delegation monitoring
// recovers those cases.
bool group_feasible(const AggregatedGroupState& agg, const Job& job);

struct DelegationRecord {
    JobId job_id;
    GroupId target_group;
    SimTime delegated_at = 0;
    double timeout_s = 30.0;
};

// Jobs whose delegation aged past its timeout while still sitting in
// {Delegated, Pending} at the child. The caller resets each to Pending at
// the parent level and adds the failed target group to the job's
// exclusions.
std::vector<JobId> monitor_delegations(
    const std::vector<DelegationRecord>& records,
    const std::function<std::optional<JobState>(const JobId&)>& state_of, SimTime now);

}  // namespace accord::topology
