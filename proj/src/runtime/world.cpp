#include "accord/runtime/world.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "accord/core/rng.hpp"

namespace accord::runtime {

using sim::CasLogEntry;
using sim::Envelope;

World::World(WorldConfig cfg)
    : cfg_(std::move(cfg)),
      latency_(cfg_.latency, cfg_.seed),
      transport_(clock_, latency_,
                 sim::TransportConfig{cfg_.detector.channel_probe_interval_ms,
                                      cfg_.detector.probe_failures_to_trip,
                                      cfg_.detector.channel_event_delay_ms}) {
    topo_ = topology::build_topology(cfg_.topo);
    workload::assign_profiles(topo_.agents, cfg_.profiles, cfg_.seed);
    jobs_ = workload::generate_jobs(cfg_.workload, topo_.agents, cfg_.seed);

    transport_.site_of = [this](const AgentId& id) -> SiteId {
        auto it = agents_.find(id);
        return it == agents_.end() ? SiteId{"site0"} : it->second->state().site;
    };
    transport_.is_crashed = [this](const AgentId& id) {
        auto it = agents_.find(id);
        return it == agents_.end() || it->second->crashed();
    };
    transport_.deliver = [this](const AgentId& to, const Envelope& env) {
        auto it = agents_.find(to);
        if (it != agents_.end()) it->second->deliver_envelope(env);
    };
    transport_.channel_event = [this](const AgentId& obs, const AgentId& peer, bool up,
                                      SimTime at) {
        auto it = agents_.find(obs);
        if (it != agents_.end()) it->second->channel_event(peer, up, at);
    };
    transport_.on_transmit = [this](const Envelope& env) {
        metrics_.on_message(env.msg->job_id, env.msg->kind, clock_.now());
        trace_.rec("tx", clock_.now(), env.from, env.msg->proposal_id.str(),
                   static_cast<std::uint64_t>(env.msg->kind));
    };

    build_agents();
    schedule_submissions();
    schedule_faults();
}

World::~World() = default;

int World::group_level(const GroupId& g) const {
    auto it = topo_.groups.find(g);
    return it == topo_.groups.end() ? 0 : it->second.level;
}

void World::open_group_channels(const topology::GroupInfo& g) {
    if (g.relay) {
        for (const auto& m : g.members) {
            auto it = agents_.find(m);
            if (it == agents_.end()) continue;
            for (const auto& p : it->second->state().peers) transport_.open_channel(m, p);
        }
        return;
    }
    const auto& members = group_members_[g.id];
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            transport_.open_channel(members[i], members[j]);
        }
    }
}

void World::add_agent(AgentState state, bool start_now) {
    const GroupId gid = state.group_id;
    auto git = topo_.groups.find(gid);
    if (git == topo_.groups.end()) throw std::runtime_error("unknown group " + gid);
    const topology::GroupInfo& group = git->second;
    bool top = gid == topo_.top_group;
    std::optional<GroupId> child;
    auto cit = topo_.child_group_of.find(state.id);
    if (cit != topo_.child_group_of.end()) child = cit->second;

    WorldContext ctx{clock_, latency_, store_, transport_, metrics_, trace_};
    auto rt = std::make_unique<AgentRuntime>(std::move(state), group, top, child, ctx,
                                             cfg_.tuning, cfg_.cost, cfg_.detector,
                                             cfg_.engine);
    const AgentId id = rt->state().id;
    agents_[id] = std::move(rt);
    auto& members = group_members_[gid];
    if (std::find(members.begin(), members.end(), id) == members.end()) members.push_back(id);
    if (start_now) {
        open_group_channels(group);
        agents_[id]->start();
    }
}

void World::build_agents() {
    for (auto& a : topo_.agents) add_agent(a, /*start_now=*/false);
    for (auto& [gid, g] : topo_.groups) open_group_channels(g);
    for (auto& [id, rt] : agents_) rt->start();
}

// Submissions apply directly at the store (harness-side injection).
void World::schedule_submissions() {
    for (const auto& gen : jobs_) {
        clock_.schedule(gen.submit_at, [this, &gen]() {
            Job job = gen.job;
            job.set_submit_time(clock_.now());
            const JobId id = job.id;
            sim::JobRecord rec{std::move(job), AgentId{}, topo_.top_group, 0};
            store_.cas_job(id, std::nullopt, std::move(rec), "harness", clock_.now());
            metrics_.on_submitted(id, clock_.now());
            trace_.rec("submit", clock_.now(), id, topo_.top_group, 0);
            last_progress_ = clock_.now();
        });
    }
}

void World::schedule_faults() {
    for (const auto& e : cfg_.schedule) {
        switch (e.kind) {
            case ScheduleEntry::Kind::Crash: {
                clock_.schedule(from_seconds(e.at_s), [this, agent = e.agent]() {
                    auto it = agents_.find(agent);
                    if (it == agents_.end() || it->second->crashed()) return;
                    it->second->crash();
                    transport_.crash(agent);
                    metrics_.note_crash(agent, clock_.now());
                    trace_.rec("crash", clock_.now(), agent, "", 0);
                });
                break;
            }
            case ScheduleEntry::Kind::Join: {
                clock_.schedule(from_seconds(e.at_s), [this, e]() {
                    auto git = topo_.groups.find(e.group);
                    if (git == topo_.groups.end() || git->second.relay) return;
                    SiteId site = e.site;
                    if (site.empty()) {
                        const auto& members = group_members_[e.group];
                        site = members.empty() ? SiteId{"site0"}
                                               : agents_[members.front()]->state().site;
                    }
                    for (int k = 0; k < e.count; ++k) {
                        int idx = join_counter_++;
                        char buf[16];
                        std::snprintf(buf, sizeof(buf), "j%03d", idx);
                        AgentState a = workload::make_joining_agent(
                            buf, e.group, site, cfg_.profiles, cfg_.seed, idx);
                        a.level = git->second.level;
                        add_agent(std::move(a), /*start_now=*/true);
                        trace_.rec("join", clock_.now(), buf, e.group, 0);
                    }
                });
                break;
            }
            case ScheduleEntry::Kind::Partition:
                transport_.partition(e.a, e.b, from_seconds(e.at_s), from_seconds(e.until_s));
                break;
            case ScheduleEntry::Kind::Delay:
                transport_.inject_delay(e.a, e.b, from_seconds(e.at_s),
                                        from_seconds(e.until_s), e.extra_ms);
                break;
        }
    }
}

void World::drain_cas_log() {
    const auto& log = store_.cas_log();
    for (; cas_cursor_ < log.size(); ++cas_cursor_) {
        const CasLogEntry& e = log[cas_cursor_];
        trace_.rec("cas", e.at, e.caller, e.job, (e.ok ? 1u : 0u));
        if (!e.ok) continue;
        last_progress_ = std::max(last_progress_, e.at);

        const bool exec_commit = e.to_state == JobState::Running &&
                                 e.from_state == JobState::Pending;
        const bool reset = e.to_state == JobState::Pending &&
                           (e.from_state == JobState::Committed ||
                            e.from_state == JobState::Running);
        const bool reclaim = e.to_state == JobState::Pending &&
                             e.from_state == JobState::Pending && e.from_pool != e.to_pool &&
                             group_level(e.to_pool) > group_level(e.from_pool);

        if (exec_commit) {
            if (!metrics_.acquire_owner(e.job, e.caller)) {
                // safety violation recorded by the collector
            }
            ++running_owners_;
        } else if (reset) {
            metrics_.release_owner(e.job);
            metrics_.on_reset(e.job);
            if (running_owners_ > 0) --running_owners_;
        } else if (reclaim) {
            metrics_.on_reset(e.job);
        } else if (e.to_state == JobState::Complete) {
            metrics_.release_owner(e.job);
            metrics_.on_complete(e.job, e.at);
            if (running_owners_ > 0) --running_owners_;
            ++terminal_jobs_;
        } else if (e.to_state == JobState::Infeasible) {
            metrics_.set_outcome(e.job, harness::Outcome::Infeasible);
            ++terminal_jobs_;
        }
    }
}

RunReport World::run(const RunOptions& opts) {
    RunReport report;
    if (opts.trace_out) trace_.attach(opts.trace_out);

    const double budget_s =
        cfg_.budget_s > 0 ? cfg_.budget_s : 2.0 * cfg_.workload.job_count + 300.0;
    const SimTime budget = from_seconds(budget_s);
    const SimDuration livelock_span = from_seconds(cfg_.livelock_span_s);
    const std::size_t total_jobs = jobs_.size();

    auto wall_start = std::chrono::steady_clock::now();
    while (!clock_.empty()) {
        SimTime next = clock_.peek_time();
        if (next > budget) break;
        if (opts.realtime) {
            auto target = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>(
                                               to_seconds(next) / opts.time_scale));
            std::this_thread::sleep_until(target);
        }
        clock_.step();
        ++report.events;
        drain_cas_log();
        if (terminal_jobs_ >= total_jobs && total_jobs > 0) break;
        if (running_owners_ == 0 && terminal_jobs_ < total_jobs &&
            clock_.now() - last_progress_ > livelock_span &&
            clock_.now() > from_seconds(1.0)) {
            // No commits, completions or submissions for a whole span with
            // work outstanding and nothing running: abort with a diagnostic.
            report.livelock_aborted = true;
            report.diagnostic = "livelock: no progress for " +
                                std::to_string(cfg_.livelock_span_s) + "s with " +
                                std::to_string(total_jobs - terminal_jobs_) +
                                " jobs outstanding";
            break;
        }
    }

    // Final outcomes for everything that never reached a terminal state.
    for (const auto& gen : jobs_) {
        auto rec = store_.read_job(gen.job.id);
        harness::MetricRecord& row = metrics_.row(gen.job.id);
        if (!rec) {
            row.outcome = harness::Outcome::Unfinished;
            continue;
        }
        switch (rec->job.state) {
            case JobState::Complete: row.outcome = harness::Outcome::Complete; break;
            case JobState::Infeasible: row.outcome = harness::Outcome::Infeasible; break;
            default: row.outcome = harness::Outcome::Unfinished; break;
        }
        row.reselections = std::max(row.reselections, rec->reselections);
    }

    report.end_time = clock_.now();
    report.trace_hash = trace_.hash();
    report.safety_violated = metrics_.safety_violated();
    if (report.safety_violated && report.diagnostic.empty()) {
        report.diagnostic = metrics_.violations().front();
    }
    return report;
}

std::vector<World::AgentSummary> World::agent_summaries() const {
    std::vector<AgentSummary> out;
    for (const auto& [id, rt] : agents_) {
        AgentSummary s;
        s.id = id;
        s.level = rt->state().level;
        s.group = rt->state().group_id;
        s.crashed = rt->crashed();
        s.capacity = rt->state().capacity;
        s.connectivity = rt->state().connectivity;
        out.push_back(std::move(s));
    }
    return out;
}

int World::surviving_leaves() const {
    int n = 0;
    for (const auto& [id, rt] : agents_) {
        if (!rt->crashed() && rt->state().level == 0) ++n;
    }
    return n;
}

std::vector<harness::DetectionRecord> World::harvest_detections() const {
    std::vector<harness::DetectionRecord> out;
    const auto& crashes = metrics_.crash_times();
    for (const auto& [id, rt] : agents_) {
        if (rt->crashed()) continue;
        for (const auto& [peer, pl] : rt->detector().peers()) {
            auto cit = crashes.find(peer);
            if (cit == crashes.end()) continue;
            harness::DetectionRecord rec;
            rec.observer = id;
            rec.peer = peer;
            rec.crashed_at = cit->second;
            rec.channel_signal_at = pl.channel_signal_at;
            rec.heartbeat_expiry_at = pl.heartbeat_expiry_at;
            if (!rec.heartbeat_expiry_at && pl.last_heartbeat_written >= 0) {
                // expiry is deterministic even when the run ended first
                rec.heartbeat_expiry_at =
                    pl.last_heartbeat_written + from_seconds(rt->detector().threshold_s());
            }
            rec.declared_at = pl.declared_dead_at;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace accord::runtime
