#include "accord/topology/topology.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace accord::topology {

const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::Mesh: return "mesh";
        case TopologyKind::Ring: return "ring";
        case TopologyKind::Hierarchical: return "hierarchical";
    }
    return "unknown";
}

namespace {

std::string padded(const char* prefix, int n, int width = 3) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, n);
    return buf;
}

// Leaves are a###, level-1 coordinators b###, level-2 c### and so on; the
// zero padding keeps lexicographic order equal to numeric order.
std::string agent_name(int level, int n) {
    const char prefix[2] = {static_cast<char>('a' + level), '\0'};
    return padded(prefix, n);
}

std::string group_name(int level, int n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "l%dg%02d", level, n);
    return buf;
}

}  // namespace

void TopologySpec::validate() const {
    if (total_agents <= 0) throw InvalidSpec("total_agents must be positive");
    switch (kind) {
        case TopologyKind::Mesh:
            return;
        case TopologyKind::Ring: {
            const auto& r = ring_params;
            if (r.ring_count <= 0 || r.ring_size < 3) {
                throw InvalidSpec("ring needs ring_count >= 1 and ring_size >= 3");
            }
            if (r.ring_count * r.ring_size != total_agents) {
                throw InvalidSpec("ring_count * ring_size != total_agents");
            }
            if (r.cross_link_count < 0 || r.cross_link_count > r.ring_size) {
                throw InvalidSpec("cross_link_count out of range");
            }
            return;
        }
        case TopologyKind::Hierarchical: {
            if (levels.empty()) throw InvalidSpec("hierarchical spec needs levels");
            int sum = 0;
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const auto& l = levels[i];
                if (l.level != static_cast<int>(i)) {
                    throw InvalidSpec("levels must be listed from level 0 upward");
                }
                if (l.group_count <= 0 || l.group_size <= 0) {
                    throw InvalidSpec("level group_count/group_size must be positive");
                }
                sum += l.group_count * l.group_size;
            }
            for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
                // every group at level i is managed by exactly one agent at i+1
                if (levels[i + 1].group_count * levels[i + 1].group_size !=
                    levels[i].group_count) {
                    throw InvalidSpec("level " + std::to_string(i + 1) +
                                      " population must equal level " + std::to_string(i) +
                                      " group count");
                }
            }
            if (levels.back().group_count != 1) {
                throw InvalidSpec("top level must form a single group");
            }
            if (sum != total_agents) {
                throw InvalidSpec("level populations sum to " + std::to_string(sum) +
                                  ", expected total_agents=" + std::to_string(total_agents));
            }
            return;
        }
    }
    throw InvalidSpec("unknown topology kind");
}

const AgentState* Topology::find(const AgentId& id) const {
    auto it = std::lower_bound(agents.begin(), agents.end(), id,
                               [](const AgentState& a, const AgentId& v) { return a.id < v; });
    if (it == agents.end() || it->id != id) return nullptr;
    return &*it;
}

namespace {

void apply_sites(Topology& topo, const TopologySpec& spec) {
    for (auto& a : topo.agents) {
        auto it = spec.site_map.find(a.id);
        if (it != spec.site_map.end()) a.site = it->second;
    }
}

Topology build_mesh(const TopologySpec& spec) {
    Topology topo;
    topo.kind = TopologyKind::Mesh;
    GroupInfo g{"l0g00", 0, {}, std::nullopt, false};
    for (int i = 0; i < spec.total_agents; ++i) {
        AgentState a;
        a.id = agent_name(0, i);
        a.level = 0;
        a.group_id = g.id;
        g.members.push_back(a.id);
        topo.agents.push_back(std::move(a));
    }
    for (auto& a : topo.agents) {
        for (const auto& m : g.members) {
            if (m != a.id) a.peers.insert(m);
        }
    }
    topo.top_group = g.id;
    topo.groups[g.id] = std::move(g);
    return topo;
}

Topology build_ring(const TopologySpec& spec) {
    const auto& r = spec.ring_params;
    Topology topo;
    topo.kind = TopologyKind::Ring;
    GroupInfo g{"l0g00", 0, {}, std::nullopt, /*relay=*/true};

    for (int i = 0; i < spec.total_agents; ++i) {
        AgentState a;
        a.id = agent_name(0, i);
        a.level = 0;
        a.group_id = g.id;
        g.members.push_back(a.id);
        topo.agents.push_back(std::move(a));
    }

    auto idx = [&](int ring, int pos) {
        return ring * r.ring_size + ((pos % r.ring_size) + r.ring_size) % r.ring_size;
    };
    for (int ring = 0; ring < r.ring_count; ++ring) {
        for (int pos = 0; pos < r.ring_size; ++pos) {
            AgentState& a = topo.agents[idx(ring, pos)];
            a.peers.insert(topo.agents[idx(ring, pos - 1)].id);
            a.peers.insert(topo.agents[idx(ring, pos + 1)].id);
        }
        // Bridge k of each ring links to bridge k of the next ring (cyclic).
        if (r.ring_count > 1) {
            int next = (ring + 1) % r.ring_count;
            for (int k = 0; k < r.cross_link_count; ++k) {
                AgentState& a = topo.agents[idx(ring, k)];
                AgentState& b = topo.agents[idx(next, k)];
                a.peers.insert(b.id);
                b.peers.insert(a.id);
            }
        }
    }
    topo.top_group = g.id;
    topo.groups[g.id] = std::move(g);
    return topo;
}

Topology build_hierarchy(const TopologySpec& spec) {
    Topology topo;
    topo.kind = TopologyKind::Hierarchical;

    // ids per level
    std::vector<std::vector<AgentId>> ids(spec.levels.size());
    for (const auto& l : spec.levels) {
        int count = l.group_count * l.group_size;
        for (int i = 0; i < count; ++i) {
            ids[l.level].push_back(agent_name(l.level, i));
        }
    }

    std::map<AgentId, AgentState> agents;
    for (const auto& l : spec.levels) {
        for (int gi = 0; gi < l.group_count; ++gi) {
            GroupInfo g{group_name(l.level, gi), l.level, {}, std::nullopt, false};
            for (int k = 0; k < l.group_size; ++k) {
                const AgentId& id = ids[l.level][gi * l.group_size + k];
                AgentState a;
                a.id = id;
                a.level = l.level;
                a.group_id = g.id;
                g.members.push_back(id);
                agents[id] = std::move(a);
            }
            topo.groups[g.id] = std::move(g);
        }
    }

    // peers: own group minus self
    for (auto& [gid, g] : topo.groups) {
        for (const auto& m : g.members) {
            for (const auto& other : g.members) {
                if (other != m) agents[m].peers.insert(other);
            }
        }
    }

    // parent/children wiring: agent i at level L+1 manages group i at level L
    for (std::size_t lvl = 0; lvl + 1 < spec.levels.size(); ++lvl) {
        const auto& child_level = spec.levels[lvl];
        for (int gi = 0; gi < child_level.group_count; ++gi) {
            const GroupId child_gid = group_name(static_cast<int>(lvl), gi);
            const AgentId& coord = ids[lvl + 1][gi];
            GroupInfo& g = topo.groups[child_gid];
            g.parent_coordinator = coord;
            topo.child_group_of[coord] = child_gid;
            for (const auto& m : g.members) {
                agents[m].parent = coord;
                agents[coord].children.insert(m);
            }
        }
    }

    topo.top_group = group_name(static_cast<int>(spec.levels.size()) - 1, 0);
    topo.agents.reserve(agents.size());
    for (auto& [id, a] : agents) topo.agents.push_back(std::move(a));
    return topo;
}

}  // namespace

Topology build_topology(const TopologySpec& spec) {
    spec.validate();
    Topology topo;
    switch (spec.kind) {
        case TopologyKind::Mesh: topo = build_mesh(spec); break;
        case TopologyKind::Ring: topo = build_ring(spec); break;
        case TopologyKind::Hierarchical: topo = build_hierarchy(spec); break;
    }
    apply_sites(topo, spec);
    return topo;
}

AggregatedGroupState aggregate_children(const GroupId& group,
                                        const std::vector<const AgentState*>& children) {
    AggregatedGroupState agg;
    agg.group_id = group;
    bool any = false;
    for (const AgentState* c : children) {
        if (!c || !c->live) continue;
        any = true;
        ++agg.member_count;
        agg.max_capacity = component_max(agg.max_capacity, c->available);
        agg.max_total_capacity = component_max(agg.max_total_capacity, c->capacity);
        for (const auto& [dtn, score] : c->connectivity.scores) {
            if (score <= 0.0) continue;
            auto& slot = agg.dtn_union.scores[dtn];
            if (score > slot) slot = score;
        }
        if (c->version > agg.as_of_version) agg.as_of_version = c->version;
    }
    if (!any) throw EmptyGroup("no live children in group " + group);
    return agg;
}

bool group_feasible(const AggregatedGroupState& agg, const Job& job) {
    if (!fits(job.requirements, agg.max_capacity)) return false;
    return agg.dtn_union.covers(required_dtns(job));
}

std::vector<JobId> monitor_delegations(
    const std::vector<DelegationRecord>& records,
    const std::function<std::optional<JobState>(const JobId&)>& state_of, SimTime now) {
    std::vector<JobId> reclaim;
    for (const auto& rec : records) {
        if (to_seconds(now - rec.delegated_at) <= rec.timeout_s) continue;
        auto state = state_of(rec.job_id);
        if (!state) continue;
        if (*state == JobState::Delegated || *state == JobState::Pending) {
            reclaim.push_back(rec.job_id);
        }
    }
    return reclaim;
}

TopologySpec TopologySpec::from_json(const nlohmann::json& j) {
    TopologySpec spec;
    const std::string kind = j.value("kind", "mesh");
    if (kind == "mesh") {
        spec.kind = TopologyKind::Mesh;
    } else if (kind == "ring") {
        spec.kind = TopologyKind::Ring;
    } else if (kind == "hierarchical") {
        spec.kind = TopologyKind::Hierarchical;
    } else {
        throw InvalidSpec("topology.kind must be mesh|ring|hierarchical, got " + kind);
    }
    spec.total_agents = j.value("total_agents", 0);
    if (j.contains("levels")) {
        for (const auto& l : j.at("levels")) {
            spec.levels.push_back(LevelSpec{l.value("level", 0), l.value("group_count", 0),
                                            l.value("group_size", 0)});
        }
    }
    if (j.contains("ring_params")) {
        const auto& r = j.at("ring_params");
        spec.ring_params.ring_count = r.value("ring_count", 0);
        spec.ring_params.ring_size = r.value("ring_size", 0);
        spec.ring_params.cross_link_count = r.value("cross_link_count", 1);
    }
    if (j.contains("site_map")) {
        for (const auto& [id, site] : j.at("site_map").items()) {
            spec.site_map[id] = site.get<std::string>();
        }
    }
    return spec;
}

}  // namespace accord::topology
