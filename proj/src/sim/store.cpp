#include "accord/sim/store.hpp"

#include <algorithm>

namespace accord::sim {

void SharedStore::log_pool_touch(const GroupId& pool, const JobId& id) {
    pool_logs_[pool].entries.emplace_back(++pool_seq_, id);
}

CasOutcome SharedStore::cas_job(const JobId& id, std::optional<std::uint64_t> expected,
                                JobRecord next, const AgentId& caller, SimTime now) {
    auto it = jobs_.find(id);
    CasLogEntry log;
    log.at = now;
    log.job = id;
    log.caller = caller;
    log.expected = expected.value_or(0);
    log.to_state = next.job.state;
    log.to_pool = next.pool;

    CasOutcome out;
    if (it == jobs_.end()) {
        if (expected.has_value()) {
            out.ok = false;
            out.current_version = 0;
            log.ok = false;
            cas_log_.push_back(log);
            return out;
        }
        log.from_state = next.job.state;
        log.from_pool = next.pool;
        log.ok = true;
        cas_log_.push_back(log);
        log_pool_touch(next.pool, id);
        out.ok = true;
        out.current_version = next.job.version;
        jobs_.emplace(id, std::move(next));
        return out;
    }

    JobRecord& cur = it->second;
    log.from_state = cur.job.state;
    log.from_pool = cur.pool;
    if (!expected.has_value() || cur.job.version != *expected) {
        out.ok = false;
        out.current_version = cur.job.version;
        log.ok = false;
        cas_log_.push_back(log);
        return out;
    }

    const GroupId old_pool = cur.pool;
    out.ok = true;
    out.current_version = next.job.version;
    log.ok = true;
    cas_log_.push_back(log);
    cur = std::move(next);
    log_pool_touch(cur.pool, id);
    if (old_pool != cur.pool) log_pool_touch(old_pool, id);
    return out;
}

std::optional<JobRecord> SharedStore::read_job(const JobId& id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

SharedStore::PoolDelta SharedStore::scan_pool(const GroupId& pool, std::uint64_t since) const {
    PoolDelta out;
    out.upto = pool_seq_;
    auto it = pool_logs_.find(pool);
    if (it == pool_logs_.end()) return out;
    const auto& entries = it->second.entries;
    auto lo = std::upper_bound(entries.begin(), entries.end(), since,
                               [](std::uint64_t v, const auto& e) { return v < e.first; });
    std::vector<JobId> ids;
    for (; lo != entries.end(); ++lo) ids.push_back(lo->second);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (const auto& id : ids) {
        auto jit = jobs_.find(id);
        if (jit != jobs_.end()) out.changed.push_back(jit->second);
    }
    return out;
}

void SharedStore::put_heartbeat(HeartbeatRecord rec) {
    const GroupId group = rec.group;
    const AgentId id = rec.id;
    heartbeats_[group][id] = std::move(rec);
    hb_logs_[group].emplace_back(++hb_seq_, id);
}

SharedStore::HeartbeatDelta SharedStore::scan_heartbeats(const GroupId& group,
                                                         std::uint64_t since) const {
    HeartbeatDelta out;
    out.upto = hb_seq_;
    auto lit = hb_logs_.find(group);
    if (lit == hb_logs_.end()) return out;
    const auto& entries = lit->second;
    auto lo = std::upper_bound(entries.begin(), entries.end(), since,
                               [](std::uint64_t v, const auto& e) { return v < e.first; });
    std::vector<AgentId> ids;
    for (; lo != entries.end(); ++lo) ids.push_back(lo->second);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto git = heartbeats_.find(group);
    for (const auto& id : ids) {
        auto hit = git->second.find(id);
        if (hit != git->second.end()) out.changed.push_back(hit->second);
    }
    return out;
}

CasOutcome SharedStore::cas_delegation(const GroupId& ns, const JobId& job,
                                       std::optional<std::uint64_t> expected,
                                       std::optional<StoredDelegation> next) {
    auto& table = delegations_[ns];
    auto it = table.find(job);
    CasOutcome out;
    if (it == table.end()) {
        if (expected.has_value()) return out;  // stale delete/update
        if (next) {
            next->version = 1;
            out.current_version = 1;
            table.emplace(job, std::move(*next));
        }
        out.ok = true;
        return out;
    }
    if (!expected.has_value() || it->second.version != *expected) {
        out.current_version = it->second.version;
        return out;
    }
    if (next) {
        next->version = it->second.version + 1;
        out.current_version = next->version;
        it->second = std::move(*next);
    } else {
        table.erase(it);
    }
    out.ok = true;
    return out;
}

void SharedStore::put_delegation(const GroupId& ns, const JobId& job, StoredDelegation rec) {
    auto& table = delegations_[ns];
    auto it = table.find(job);
    rec.version = it == table.end() ? 1 : it->second.version + 1;
    table[job] = std::move(rec);
}

std::vector<StoredDelegation> SharedStore::scan_delegations(const GroupId& ns) const {
    std::vector<StoredDelegation> out;
    auto it = delegations_.find(ns);
    if (it == delegations_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [job, rec] : it->second) out.push_back(rec);
    return out;
}

std::vector<JobRecord> SharedStore::all_jobs() const {
    std::vector<JobRecord> out;
    out.reserve(jobs_.size());
    for (const auto& [id, rec] : jobs_) out.push_back(rec);
    return out;
}

}  // namespace accord::sim
