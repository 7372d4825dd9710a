#include "accord/runtime/agent.hpp"

#include <algorithm>
#include <cmath>

#include "accord/core/rng.hpp"

namespace accord::runtime {

namespace {
// How long a locally observed commit decision shadows a still-pending store
// record before the view falls back to store truth.
constexpr double kTakenOverlayTtlS = 10.0;
}  // namespace

using consensus::Engine;
using consensus::JobGate;
using consensus::ProposalRecord;
using consensus::QuorumView;
using sim::CasOutcome;
using sim::Envelope;
using sim::JobRecord;

AgentRuntime::AgentRuntime(AgentState initial, topology::GroupInfo group, bool top_level,
                           std::optional<GroupId> child_group, WorldContext ctx,
                           RuntimeTuning tuning, selection::CostParams cost_params,
                           resilience::DetectorConfig detector_cfg,
                           consensus::EngineConfig engine_cfg)
    : self_(std::move(initial)),
      group_(std::move(group)),
      top_level_(top_level),
      child_group_(std::move(child_group)),
      ctx_(ctx),
      tuning_(tuning),
      cost_params_(cost_params),
      detector_cfg_(detector_cfg),
      detector_(self_.id, detector_cfg,
                // deterministic per-agent jitter in [-1, 1]
                (static_cast<double>(fnv1a_str(self_.id) % 2000001) / 1000000.0) - 1.0),
      cache_(cost_params.cache_capacity, from_seconds(cost_params.cache_ttl_s)) {
    Engine::Hooks hooks;
    hooks.broadcast = [this](const ConsensusMessage& m) { broadcast(m); };
    hooks.on_win = [this](const ProposalRecord& rec) { handle_win(rec); };
    hooks.on_peer_decided = [this](const ProposalRecord& rec) { handle_peer_decided(rec); };
    hooks.on_own_abort = [this](const JobId&, consensus::Phase) {};
    hooks.quorum = [this]() { return quorum_view(); };
    hooks.is_member = [this](const AgentId& id) { return is_live_member(id); };
    hooks.job_gate = [this](const JobId& id) { return job_gate(id); };
    engine_ = std::make_unique<Engine>(self_.id, engine_cfg, std::move(hooks));
}

void AgentRuntime::start() {
    started_ = true;
    // Stagger per agent so the population does not tick in lockstep.
    SimDuration tick = from_millis(tuning_.tick_interval_ms);
    SimDuration stagger = static_cast<SimDuration>(fnv1a_str(self_.id) % static_cast<std::uint64_t>(tick ? tick : 1));
    write_heartbeat();  // registration
    schedule_heartbeat(from_seconds(detector_cfg_.heartbeat_interval_s) + stagger);
    schedule_tick(stagger + 1);
}

void AgentRuntime::crash() {
    crashed_ = true;
    inbox_.clear();
    running_.clear();
}

consensus::QuorumView AgentRuntime::quorum_view() const {
    int n_live = 1;  // self
    for (const auto& [id, m] : members_) {
        if (detector_.is_live(id)) ++n_live;
    }
    QuorumView qv;
    qv.n_live = n_live;
    qv.q = consensus::quorum_size(n_live);
    return qv;
}

bool AgentRuntime::is_live_member(const AgentId& id) const {
    if (id == self_.id) return true;
    return members_.count(id) > 0 && detector_.is_live(id);
}

std::vector<AgentId> AgentRuntime::live_members() const {
    std::vector<AgentId> out;
    for (const auto& [id, m] : members_) {
        if (detector_.is_live(id)) out.push_back(id);
    }
    return out;
}

bool AgentRuntime::smallest_live_member() const {
    for (const auto& [id, m] : members_) {
        if (detector_.is_live(id) && id < self_.id) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// task queue

void AgentRuntime::enqueue(Task t) {
    if (crashed_) return;
    inbox_.push_back(std::move(t));
    pump();
}

void AgentRuntime::pump() {
    if (process_scheduled_ || inbox_.empty() || crashed_) return;
    process_scheduled_ = true;
    SimTime at = std::max(ctx_.clock.now(), busy_until_);
    ctx_.clock.schedule(at, [this]() { process_one(); });
}

void AgentRuntime::process_one() {
    process_scheduled_ = false;
    if (crashed_) {
        inbox_.clear();
        return;
    }
    if (inbox_.empty()) return;
    Task t = std::move(inbox_.front());
    inbox_.pop_front();
    SimDuration extra = t.fn();
    busy_until_ = ctx_.clock.now() + t.base_service + extra;
    pump();
}

// ---------------------------------------------------------------------------
// timers

void AgentRuntime::schedule_tick(SimDuration delay) {
    ctx_.clock.schedule_in(delay, [this]() {
        if (crashed_ || !started_) return;
        enqueue(Task{[this]() { do_tick(); return SimDuration{0}; },
                     from_micros(tuning_.msg_service_us)});
        schedule_tick(from_millis(tuning_.tick_interval_ms));
    });
}

void AgentRuntime::schedule_heartbeat(SimDuration delay) {
    ctx_.clock.schedule_in(delay, [this]() {
        if (crashed_) return;
        write_heartbeat();
        schedule_heartbeat(from_seconds(detector_cfg_.heartbeat_interval_s));
    });
}

void AgentRuntime::write_heartbeat() {
    sim::HeartbeatRecord hb;
    hb.id = self_.id;
    hb.level = self_.level;
    hb.group = self_.group_id;
    hb.site = self_.site;
    hb.written_at = ctx_.clock.now();
    hb.agent_version = self_.version;
    hb.available = self_.available;
    hb.capacity = self_.is_coordinator() ? agg_total_capacity_ : self_.capacity;
    hb.connectivity = self_.connectivity;
    if (child_group_) hb.child_group = *child_group_;
    self_.last_heartbeat = hb.written_at;
    // One-way write: applies when it reaches the store.
    ctx_.clock.schedule_in(store_rtt() / 2, [this, hb = std::move(hb)]() mutable {
        ctx_.store.put_heartbeat(std::move(hb));
    });
}

void AgentRuntime::do_tick() {
    engine_->tick(ctx_.clock.now());
    if (!refresh_inflight_) issue_refresh();
}

SimDuration AgentRuntime::store_rtt() const {
    return ctx_.latency.store_round_trip(self_.site) +
           from_micros(tuning_.store_op_service_us);
}

void AgentRuntime::issue_refresh() {
    refresh_inflight_ = true;
    SimDuration rtt = store_rtt();
    std::vector<JobId> watch;
    for (const auto& [job, del] : delegations_) {
        if (!child_group_ || del.record.target_group != *child_group_) watch.push_back(job);
    }
    ctx_.clock.schedule_in(rtt / 2, [this, watch = std::move(watch), rtt]() {
        if (crashed_) return;
        RefreshResult res;
        res.own_hb = ctx_.store.scan_heartbeats(self_.group_id, own_hb_seq_);
        res.own_pool = ctx_.store.scan_pool(self_.group_id, own_pool_seq_);
        if (child_group_) {
            res.child_hb = ctx_.store.scan_heartbeats(*child_group_, child_hb_seq_);
            res.child_pool = ctx_.store.scan_pool(*child_group_, child_pool_seq_);
            res.delegations = ctx_.store.scan_delegations(self_.group_id);
        }
        for (const auto& id : watch) {
            auto rec = ctx_.store.read_job(id);
            if (rec) res.watched.push_back(std::move(*rec));
        }
        ctx_.clock.schedule_in(rtt - rtt / 2, [this, res = std::move(res)]() mutable {
            if (crashed_) return;
            refresh_inflight_ = false;
            enqueue(Task{[this, res = std::move(res)]() mutable { return apply_refresh(std::move(res)); },
                         from_micros(tuning_.tick_service_us)});
        });
    });
}

// ---------------------------------------------------------------------------
// refresh application

SimDuration AgentRuntime::apply_refresh(RefreshResult res) {
    const SimTime now = ctx_.clock.now();

    // membership / peer state
    own_hb_seq_ = res.own_hb.upto;
    for (auto& hb : res.own_hb.changed) {
        if (hb.id == self_.id) continue;
        MemberView& mv = members_[hb.id];
        mv.agent.id = hb.id;
        mv.agent.level = hb.level;
        mv.agent.group_id = hb.group;
        mv.agent.available = hb.available;
        mv.agent.capacity = hb.capacity;
        mv.agent.connectivity = hb.connectivity;
        mv.agent.version = hb.agent_version;
        mv.agent.site = hb.site;
        mv.agent.live = true;
        mv.child_group = hb.child_group;
        mv.level = hb.level;
        detector_.observe_heartbeat(hb.id, hb.written_at, hb.agent_version);
    }

    if (child_group_) {
        child_hb_seq_ = res.child_hb.upto;
        for (auto& hb : res.child_hb.changed) {
            MemberView& mv = children_[hb.id];
            mv.agent.id = hb.id;
            mv.agent.level = hb.level;
            mv.agent.group_id = hb.group;
            mv.agent.available = hb.available;
            mv.agent.capacity = hb.capacity;
            mv.agent.connectivity = hb.connectivity;
            mv.agent.version = hb.agent_version;
            mv.agent.live = true;
            detector_.observe_heartbeat(hb.id, hb.written_at, hb.agent_version);
        }
    }

    // own pool
    own_pool_seq_ = res.own_pool.upto;
    for (auto& rec : res.own_pool.changed) {
        const JobId id = rec.job.id;
        if (rec.pool != self_.group_id || is_terminal(rec.job.state)) {
            pool_view_.erase(id);
            continue;
        }
        JobView& v = pool_view_[id];
        v.job = std::make_shared<const Job>(rec.job);
        v.winner = rec.winner;
        v.pool = rec.pool;
        v.reselections = rec.reselections;
        if (rec.job.state == JobState::Pending && rec.winner.empty()) {
            v.taken_overlay_until = -1;  // store truth: selectable again
        }
    }

    // child pool mirror (coordinators)
    if (child_group_) {
        child_pool_seq_ = res.child_pool.upto;
        for (auto& rec : res.child_pool.changed) {
            const JobId id = rec.job.id;
            if (rec.pool != *child_group_ || is_terminal(rec.job.state)) {
                child_jobs_.erase(id);
                if (is_terminal(rec.job.state)) {
                    // delegation fulfilled; drop the record
                    auto dit = delegations_.find(id);
                    if (dit != delegations_.end()) {
                        ctx_.store.cas_delegation(self_.group_id, id, dit->second.version,
                                                  std::nullopt);
                        delegations_.erase(dit);
                        delegation_progress_seen_.erase(id);
                    }
                }
                continue;
            }
            child_jobs_[id] = rec;
        }
        // delegation mirror
        delegations_.clear();
        for (auto& d : res.delegations) delegations_[d.record.job_id] = d;
        for (auto& rec : res.watched) child_jobs_[rec.job.id] = rec;
    }

    auto change = detector_.sweep(now);
    if (!change.died.empty()) on_members_died(change.died);
    // Revived peers re-enter membership automatically (their view entries
    // are still present); nothing else to do for a fresh-join re-admission.

    if (child_group_) {
        refresh_aggregate(!res.child_hb.changed.empty());
        monitor_delegations_now();
    }

    // quorum observation bookkeeping
    QuorumView qv = quorum_view();
    if (qv.q != last_quorum_q_ || qv.n_live != last_quorum_n_) {
        last_quorum_q_ = qv.q;
        last_quorum_n_ = qv.n_live;
        ctx_.metrics.on_quorum_change({self_.id, now, qv.n_live, qv.q});
    }

    SimDuration eval_time = run_selection();
    if (top_level_) mark_infeasible_jobs();
    return eval_time;
}

void AgentRuntime::refresh_aggregate(bool changed) {
    const SimTime now = ctx_.clock.now();
    if (!changed && last_aggregate_at_ >= 0 &&
        to_seconds(now - last_aggregate_at_) < tuning_.aggregation_refresh_s) {
        return;
    }
    std::vector<const AgentState*> live;
    for (const auto& [id, mv] : children_) {
        if (detector_.is_live(id)) live.push_back(&mv.agent);
    }
    try {
        auto agg = topology::aggregate_children(*child_group_, live);
        if (agg.max_capacity != self_.available ||
            !(agg.dtn_union == self_.connectivity)) {
            self_.available = agg.max_capacity;
            self_.capacity = agg.max_capacity;
            self_.connectivity = agg.dtn_union;
            self_.touch();
        }
        agg_total_capacity_ = agg.max_total_capacity;
    } catch (const topology::EmptyGroup&) {
        if (!(self_.available == ResourceVector{})) {
            self_.available = ResourceVector{};
            self_.capacity = ResourceVector{};
            self_.connectivity = ConnectivityProfile{};
            self_.touch();
        }
        agg_total_capacity_ = ResourceVector{};
    }
    last_aggregate_at_ = now;
}

// ---------------------------------------------------------------------------
// selection

double AgentRuntime::entry_cost(const AgentState& row, const GroupId& row_child_group,
                                const JobView& view, std::uint64_t* evals) {
    const Job& job = *view.job;
    selection::CacheKey key{row.id, job.id, row.version, job.version};
    return cache_.get_or_compute(key, ctx_.clock.now(), [&]() {
        ++(*evals);
        if (row.level > 0) {
            // Coordinator rows: optimistic group feasibility over the
            // aggregate the coordinator advertises, plus exclusion flags.
            if (!row_child_group.empty() && job.exclusions.count(row_child_group)) {
                return selection::kInfeasibleCost;
            }
            if (!fits(job.requirements, row.available) ||
                !row.connectivity.covers(required_dtns(job))) {
                return selection::kInfeasibleCost;
            }
            return selection::cost(row, job, cost_params_);
        }
        if (!selection::feasible(row, job, cost_params_)) {
            return selection::kInfeasibleCost;
        }
        return selection::cost(row, job, cost_params_);
    });
}

SimDuration AgentRuntime::run_selection() {
    std::uint64_t evals = 0;

    // rows: self plus live members with known state; ring overlays restrict
    // the matrix to direct link peers (pool scoping stays group-wide).
    std::vector<const AgentState*> rows;
    std::vector<GroupId> row_child;
    rows.push_back(&self_);
    row_child.push_back(child_group_ ? *child_group_ : GroupId{});
    for (const auto& [id, mv] : members_) {
        if (!detector_.is_live(id)) continue;
        if (group_.relay && !self_.peers.count(id)) continue;
        rows.push_back(&mv.agent);
        row_child.push_back(mv.child_group);
    }

    const SimTime now = ctx_.clock.now();
    std::vector<std::pair<std::shared_ptr<const Job>, double>> candidates;
    std::vector<std::pair<double, std::shared_ptr<const Job>>> scored;
    for (const auto& [id, v] : pool_view_) {
        if (!view_selectable(v, now)) continue;
        if (engine_->has_outgoing(id)) continue;
        if (child_group_ && v.job->exclusions.count(*child_group_)) continue;

        double own = selection::kInfeasibleCost;
        double best = selection::kInfeasibleCost;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double c = entry_cost(*rows[r], row_child[r], v, &evals);
            if (c < best) best = c;
            if (rows[r] == &self_) own = c;
        }
        if (std::isinf(own) || std::isinf(best)) continue;
        if (own <= (1.0 + cost_params_.theta) * best) {
            scored.emplace_back(own, v.job);
        }
    }

    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->id < b.second->id;
    });
    for (auto& [c, job] : scored) {
        if (static_cast<int>(candidates.size()) >= cost_params_.batch) break;
        candidates.emplace_back(job, c);
    }
    if (!candidates.empty()) {
        engine_->propose(candidates, ctx_.clock.now());
    }
    return from_micros(tuning_.cost_eval_service_us * static_cast<double>(evals));
}

void AgentRuntime::mark_infeasible_jobs() {
    if (!smallest_live_member()) return;
    const SimTime now = ctx_.clock.now();
    for (const auto& [id, v] : pool_view_) {
        if (!view_selectable(v, now)) continue;
        const Job& job = *v.job;

        auto row_capable = [&](const AgentState& row, const GroupId& rc) {
            if (row.level > 0) {
                if (!rc.empty() && job.exclusions.count(rc)) return false;
                ResourceVector cap = (&row == &self_) ? agg_total_capacity_ : row.capacity;
                if (!fits(job.requirements, cap)) return false;
                return row.connectivity.covers(required_dtns(job));
            }
            if (!fits(job.requirements, row.capacity)) return false;
            if (cost_params_.strict_connectivity &&
                !row.connectivity.covers(required_dtns(job))) {
                return false;
            }
            return true;
        };

        bool any = row_capable(self_, child_group_ ? *child_group_ : GroupId{});
        if (!any) {
            for (const auto& [mid, mv] : members_) {
                if (!detector_.is_live(mid)) continue;
                if (row_capable(mv.agent, mv.child_group)) {
                    any = true;
                    break;
                }
            }
        }
        if (any) {
            infeasible_since_.erase(id);
            continue;
        }
        auto [sit, fresh] = infeasible_since_.emplace(id, now);
        if (fresh || to_seconds(now - sit->second) < tuning_.infeasible_confirm_s) continue;

        Job next = *v.job;
        if (!next.try_transition(JobState::Infeasible)) continue;
        next.clear_selection_times();
        JobRecord nrec{next, AgentId{}, v.pool, v.reselections};
        store_cas_job(id, v.job->version, std::move(nrec), [this](CasOutcome res) {
            if (res.ok) ++ctx_.metrics.infeasible_marks;
        });
    }
}

// ---------------------------------------------------------------------------
// consensus hooks

void AgentRuntime::broadcast(const ConsensusMessage& msg) {
    auto shared = std::make_shared<const ConsensusMessage>(msg);
    Envelope env;
    env.msg = shared;
    env.from = self_.id;
    env.origin = self_.id;
    if (group_.relay) {
        env.relay_id = (fnv1a_str(self_.id) << 20) ^ ++relay_counter_;
        env.ttl = static_cast<int>(group_.members.size());
        relay_seen_.insert(env.relay_id);
        relay_seen_order_.emplace_back(ctx_.clock.now(), env.relay_id);
        for (const auto& p : self_.peers) {
            ctx_.transport.send(self_.id, p, env);
        }
        return;
    }
    for (const auto& [id, mv] : members_) {
        if (!detector_.is_live(id)) continue;
        ctx_.transport.send(self_.id, id, env);
    }
}

void AgentRuntime::deliver_envelope(const Envelope& env) {
    if (crashed_) return;
    if (env.relay_id != 0) {
        if (relay_seen_.count(env.relay_id)) return;
        relay_seen_.insert(env.relay_id);
        relay_seen_order_.emplace_back(ctx_.clock.now(), env.relay_id);
        // bounded memory: forget old flood ids
        while (relay_seen_order_.size() > 4096 &&
               to_seconds(ctx_.clock.now() - relay_seen_order_.front().first) > 30.0) {
            relay_seen_.erase(relay_seen_order_.front().second);
            relay_seen_order_.pop_front();
        }
        if (env.ttl > 1) {
            Envelope fwd = env;
            fwd.ttl = env.ttl - 1;
            fwd.from = self_.id;
            for (const auto& p : self_.peers) {
                if (p == env.from || p == env.origin) continue;
                ctx_.transport.send(self_.id, p, fwd);
            }
        }
        if (env.msg->sender == self_.id) return;  // own flood echoed back
    }

    enqueue(Task{[this, env]() {
                     const ConsensusMessage& m = *env.msg;
                     if (m.kind == MsgKind::Proposal && m.job) {
                         auto it = pool_view_.find(m.job_id);
                         if (it == pool_view_.end() && m.job->state == JobState::Pending) {
                             // proposal carries the job body; merge it ahead
                             // of the next pool refresh
                             JobView v;
                             v.job = m.job;
                             v.pool = self_.group_id;
                             pool_view_.emplace(m.job_id, std::move(v));
                         }
                     }
                     engine_->on_message(m, ctx_.clock.now());
                     return SimDuration{0};
                 },
                 from_micros(tuning_.msg_service_us)});
}

void AgentRuntime::channel_event(const AgentId& peer, bool up, SimTime at) {
    if (crashed_) return;
    enqueue(Task{[this, peer, up, at]() {
                     detector_.on_channel(peer, up, at);
                     auto change = detector_.sweep(ctx_.clock.now());
                     if (!change.died.empty()) on_members_died(change.died);
                     return SimDuration{0};
                 },
                 from_micros(tuning_.msg_service_us)});
}

consensus::JobGate AgentRuntime::job_gate(const JobId& id) const {
    auto it = pool_view_.find(id);
    if (it == pool_view_.end()) return JobGate::Taken;  // unknown and no body: gone
    return view_selectable(it->second, ctx_.clock.now()) ? JobGate::Acceptable
                                                         : JobGate::Taken;
}

void AgentRuntime::handle_peer_decided(const ProposalRecord& rec) {
    auto it = pool_view_.find(rec.job_id);
    if (it == pool_view_.end()) return;
    it->second.taken_overlay_until =
        ctx_.clock.now() + from_seconds(kTakenOverlayTtlS);
}

void AgentRuntime::handle_win(const ProposalRecord& rec) {
    auto it = pool_view_.find(rec.job_id);
    if (it == pool_view_.end()) return;
    JobView& v = it->second;
    const SimTime now = ctx_.clock.now();
    if (!view_selectable(v, now)) return;
    Job next = *v.job;
    next.set_selection_start(rec.started_at);
    if (!next.try_transition(JobState::Proposed) || !next.try_transition(JobState::Prepared) ||
        !next.try_transition(JobState::Committed)) {
        return;
    }
    next.set_selection_end(now);

    if (self_.is_coordinator()) {
        if (!child_group_) return;
        // Delegate: hand the job to the managed group's pool for local
        // selection there.
        if (!next.try_transition(JobState::Delegated) ||
            !next.try_transition(JobState::Pending)) {
            return;
        }
        next.clear_selection_times();
        JobRecord nrec{next, AgentId{}, *child_group_, v.reselections};
        const std::uint64_t expected = v.job->version;
        const SimTime started = rec.started_at;
        store_cas_job(rec.job_id, expected, std::move(nrec),
                      [this, job_id = rec.job_id, started, now](CasOutcome res) {
                          if (!res.ok) {
                              ++ctx_.metrics.cas_conflicts;
                              return;
                          }
                          ctx_.metrics.on_commit(
                              {job_id, self_.id, self_.level, started, now});
                          ctx_.trace.rec("delegate", now, self_.id, job_id, 0);
                          topology::DelegationRecord del;
                          del.job_id = job_id;
                          del.target_group = *child_group_;
                          del.delegated_at = ctx_.clock.now();
                          del.timeout_s = tuning_.delegation_timeout_s;
                          sim::StoredDelegation stored{del, self_.id, 0};
                          delegations_[job_id] = stored;
                          delegation_progress_seen_[job_id] = false;
                          ctx_.clock.schedule_in(store_rtt() / 2, [this, job_id, stored]() {
                              ctx_.store.put_delegation(self_.group_id, job_id, stored);
                          });
                      });
        v.taken_overlay_until = now + from_seconds(kTakenOverlayTtlS);
        return;
    }

    // Leaf: execute locally. Pipelined wins may have consumed capacity since
    // the cost matrix was built, so re-check before committing.
    if (!self_.try_consume(next.requirements)) return;
    if (!next.try_transition(JobState::Running)) {
        self_.release(next.requirements);
        return;
    }
    JobRecord nrec{next, self_.id, v.pool, v.reselections};
    const std::uint64_t committed_version = nrec.job.version;
    const ResourceVector req = next.requirements;
    const double walltime = next.walltime_s;
    const std::uint64_t expected = v.job->version;
    const SimTime started = rec.started_at;
    store_cas_job(rec.job_id, expected, std::move(nrec),
                  [this, job_id = rec.job_id, req, walltime, committed_version, started,
                   now](CasOutcome res) {
                      if (!res.ok) {
                          ++ctx_.metrics.cas_conflicts;
                          self_.release(req);
                          return;
                      }
                      ctx_.metrics.on_commit({job_id, self_.id, self_.level, started, now});
                      ctx_.trace.rec("commit", now, self_.id, job_id, committed_version);
                      running_[job_id] = RunningJob{committed_version, req};
                      ctx_.clock.schedule_in(from_seconds(walltime), [this, job_id]() {
                          if (crashed_) return;
                          enqueue(Task{[this, job_id]() {
                                           auto rit = running_.find(job_id);
                                           if (rit == running_.end()) return SimDuration{0};
                                           auto vit = pool_view_.find(job_id);
                                           Job done;
                                           if (vit != pool_view_.end() && vit->second.job &&
                                               vit->second.job->version == rit->second.version) {
                                               done = *vit->second.job;
                                           } else {
                                               auto cur = ctx_.store.read_job(job_id);
                                               if (!cur || cur->job.version != rit->second.version) {
                                                   // reselected away from us
                                                   self_.release(rit->second.req);
                                                   running_.erase(rit);
                                                   return SimDuration{0};
                                               }
                                               done = cur->job;
                                           }
                                           if (!done.try_transition(JobState::Complete)) {
                                               self_.release(rit->second.req);
                                               running_.erase(rit);
                                               return SimDuration{0};
                                           }
                                           JobRecord crec{done, self_.id, self_.group_id, 0};
                                           store_cas_job(job_id, rit->second.version,
                                                         std::move(crec),
                                                         [this, job_id](CasOutcome r2) {
                                                             auto rj = running_.find(job_id);
                                                             if (rj != running_.end()) {
                                                                 self_.release(rj->second.req);
                                                                 running_.erase(rj);
                                                             }
                                                             if (!r2.ok) {
                                                                 ++ctx_.metrics.cas_conflicts;
                                                             }
                                                         });
                                           return SimDuration{0};
                                       },
                                       from_micros(tuning_.msg_service_us)});
                      });
                  });
    v.taken_overlay_until = now + from_seconds(kTakenOverlayTtlS);
}

// ---------------------------------------------------------------------------
// resilience

void AgentRuntime::on_members_died(const std::vector<AgentId>& died) {
    for (const auto& dead : died) {
        ctx_.trace.rec("declare_dead", ctx_.clock.now(), self_.id, dead, 0);
        if (members_.count(dead)) reselect_jobs_of(dead);
        if (child_group_ && children_.count(dead)) {
            // Children execute from the child pool; reset their lost work.
            for (const auto& [jid, rec] : child_jobs_) {
                if (rec.winner != dead) continue;
                if (rec.job.state != JobState::Committed && rec.job.state != JobState::Running) {
                    continue;
                }
                Job next = rec.job;
                if (!next.try_transition(JobState::Pending)) continue;
                next.clear_selection_times();
                JobRecord nrec{next, AgentId{}, rec.pool, rec.reselections + 1};
                store_cas_job(jid, rec.job.version, std::move(nrec), [](CasOutcome) {});
            }
            refresh_aggregate(true);
        }
    }
}

void AgentRuntime::reselect_jobs_of(const AgentId& dead) {
    for (const auto& [jid, v] : pool_view_) {
        if (v.winner != dead || !v.job) continue;
        if (v.job->state != JobState::Committed && v.job->state != JobState::Running) continue;
        Job next = *v.job;
        if (!next.try_transition(JobState::Pending)) continue;
        next.clear_selection_times();
        JobRecord nrec{next, AgentId{}, v.pool, v.reselections + 1};
        store_cas_job(jid, v.job->version, std::move(nrec), [](CasOutcome) {});
    }
}

// ---------------------------------------------------------------------------
// delegation monitoring

void AgentRuntime::monitor_delegations_now() {
    const SimTime now = ctx_.clock.now();

    // Adopt records whose owner died; the lexicographically smallest live
    // sibling takes them over.
    for (auto& [jid, del] : delegations_) {
        if (del.owner == self_.id) continue;
        bool owner_alive = del.owner == self_.id ||
                           (members_.count(del.owner) && detector_.is_live(del.owner));
        if (!owner_alive && smallest_live_member()) {
            sim::StoredDelegation next = del;
            next.owner = self_.id;
            auto out = ctx_.store.cas_delegation(self_.group_id, jid, del.version, next);
            if (out.ok) {
                del.owner = self_.id;
                del.version = out.current_version;
            }
        }
    }

    std::vector<topology::DelegationRecord> mine;
    for (const auto& [jid, del] : delegations_) {
        if (del.owner == self_.id) mine.push_back(del.record);
    }

    auto state_of = [this](const JobId& id) -> std::optional<JobState> {
        auto it = child_jobs_.find(id);
        if (it != child_jobs_.end()) return it->second.job.state;
        auto v = pool_view_.find(id);
        if (v != pool_view_.end() && v->second.job) return v->second.job->state;
        return std::nullopt;
    };

    // Progress extension: once the child group picks a job up, restart the
    // timeout window so a later crash-reset gets a fresh grace period.
    for (auto& [jid, del] : delegations_) {
        if (del.owner != self_.id) continue;
        auto st = state_of(jid);
        if (!st) continue;
        if ((*st == JobState::Committed || *st == JobState::Running) &&
            !delegation_progress_seen_[jid]) {
            delegation_progress_seen_[jid] = true;
            sim::StoredDelegation next = del;
            next.record.delegated_at = now;
            auto out = ctx_.store.cas_delegation(self_.group_id, jid, del.version, next);
            if (out.ok) {
                del.record.delegated_at = now;
                del.version = out.current_version;
            }
        }
    }

    auto reclaim_ids = topology::monitor_delegations(mine, state_of, now);
    for (const auto& jid : reclaim_ids) {
        auto dit = delegations_.find(jid);
        if (dit == delegations_.end()) continue;
        auto jit = child_jobs_.find(jid);
        if (jit == child_jobs_.end()) continue;
        // Queued-but-hostable jobs stay delegated; the timeout exists to
        // recover misdelegations (aggregation optimism) and group capacity
        // loss, where no single live child can ever take the job.
        bool hostable = false;
        for (const auto& [cid, cv] : children_) {
            if (!detector_.is_live(cid)) continue;
            if (fits(jit->second.job.requirements, cv.agent.capacity) &&
                cv.agent.connectivity.covers(required_dtns(jit->second.job))) {
                hostable = true;
                break;
            }
        }
        if (hostable) continue;
        reclaim_job(jit->second, dit->second.record, dit->second.version);
    }
}

void AgentRuntime::reclaim_job(const sim::JobRecord& rec, const topology::DelegationRecord& del,
                               std::uint64_t del_version) {
    Job next = rec.job;
    if (next.state != JobState::Pending) {
        if (!next.try_transition(JobState::Pending)) return;
    } else {
        next.touch();
    }
    next.add_exclusion(del.target_group);
    next.clear_selection_times();
    JobRecord nrec{next, AgentId{}, self_.group_id, rec.reselections + 1};
    store_cas_job(rec.job.id, rec.job.version, std::move(nrec),
                  [this, jid = rec.job.id, del_version](CasOutcome res) {
                      if (!res.ok) return;
                      ++ctx_.metrics.reclaims;
                      ctx_.trace.rec("reclaim", ctx_.clock.now(), self_.id, jid, 0);
                      ctx_.store.cas_delegation(self_.group_id, jid, del_version, std::nullopt);
                      delegations_.erase(jid);
                      delegation_progress_seen_.erase(jid);
                      child_jobs_.erase(jid);
                  });
}

// ---------------------------------------------------------------------------
// store frontend

void AgentRuntime::store_cas_job(const JobId& id, std::optional<std::uint64_t> expected,
                                 JobRecord next, std::function<void(CasOutcome)> done) {
    SimDuration rtt = store_rtt();
    ctx_.clock.schedule_in(rtt / 2, [this, id, expected, next = std::move(next), rtt,
                                     done = std::move(done)]() mutable {
        CasOutcome out = ctx_.store.cas_job(id, expected, std::move(next), self_.id,
                                            ctx_.clock.now());
        ctx_.clock.schedule_in(rtt - rtt / 2, [this, out, done = std::move(done)]() {
            if (crashed_) return;
            done(out);
        });
    });
}

}  // namespace accord::runtime
