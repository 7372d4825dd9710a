#include "accord/consensus/engine.hpp"

#include <algorithm>

namespace accord::consensus {

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Proposing:  return "proposing";
        case Phase::Preparing:  return "preparing";
        case Phase::Committing: return "committing";
        case Phase::Done:       return "done";
        case Phase::Aborted:    return "aborted";
    }
    return "unknown";
}

Engine::Engine(AgentId self, EngineConfig cfg, Hooks hooks)
    : self_(std::move(self)), cfg_(cfg), hooks_(std::move(hooks)) {}

bool Engine::has_outgoing(const JobId& job) const {
    auto it = outgoing_by_job_.find(job);
    if (it == outgoing_by_job_.end()) return false;
    auto rit = records_.find(it->second);
    return rit != records_.end() && rit->second.active();
}

const ProposalRecord* Engine::best_active(const JobId& job) const {
    const ProposalRecord* best = nullptr;
    for (const auto& [pid, rec] : records_) {
        if (rec.job_id != job || !rec.active()) continue;
        if (!best || proposal_beats(rec.cost, rec.proposer, best->cost, best->proposer)) {
            best = &rec;
        }
    }
    return best;
}

std::vector<const ProposalRecord*> Engine::propose(
    const std::vector<std::pair<std::shared_ptr<const Job>, double>>& candidates,
    SimTime now) {
    std::vector<const ProposalRecord*> created;
    for (const auto& [job, cost] : candidates) {
        if (static_cast<int>(created.size()) >= cfg_.batch) break;  // deferred to next round
        if (has_outgoing(job->id)) continue;  // never re-proposed while active
        // Don't open a round we already know we'd lose.
        if (const ProposalRecord* best = best_active(job->id)) {
            if (!proposal_beats(cost, self_, best->cost, best->proposer)) continue;
        }

        ConsensusMessage msg;
        msg.kind = MsgKind::Proposal;
        msg.proposal_id = ProposalId{self_, ++next_counter_};
        msg.job_id = job->id;
        msg.proposer = self_;
        msg.cost = cost;
        msg.sender = self_;
        msg.job = job;

        ProposalRecord& rec = create_record(msg, Direction::Outgoing, now);
        rec.endorsed = true;
        rec.prepare_votes.insert(self_);  // proposer's own vote counts
        outgoing_by_job_[job->id] = rec.id;

        ++stats_.proposals_sent;
        hooks_.broadcast(msg);
        created.push_back(&rec);
        drain_buffered(rec.id, now);
        advance(rec, now);  // a singleton group reaches quorum immediately
    }
    return created;
}

ProposalRecord& Engine::create_record(const ConsensusMessage& msg, Direction dir, SimTime now) {
    ProposalRecord rec;
    rec.id = msg.proposal_id;
    rec.job_id = msg.job_id;
    rec.proposer = msg.proposer;
    rec.cost = msg.cost;
    rec.direction = dir;
    rec.phase = dir == Direction::Outgoing ? Phase::Proposing : Phase::Preparing;
    rec.started_at = now;
    rec.phase_entered_at = now;
    rec.job = msg.job;
    auto [it, inserted] = records_.emplace(rec.id, std::move(rec));
    return it->second;
}

void Engine::on_message(const ConsensusMessage& msg, SimTime now) {
    if (hooks_.is_member && !hooks_.is_member(msg.sender)) {
        ++stats_.foreign_votes_ignored;
        return;
    }
    if (msg.kind == MsgKind::Proposal) {
        handle_proposal(msg, now);
    } else {
        handle_vote(msg, now);
    }
}

void Engine::handle_proposal(const ConsensusMessage& msg, SimTime now) {
    if (records_.count(msg.proposal_id)) return;  // duplicate broadcast

    ProposalRecord& rec = create_record(msg, Direction::Incoming, now);
    rec.prepare_votes.insert(msg.proposer);  // implicit self-endorsement

    if (hooks_.job_gate && hooks_.job_gate(msg.job_id) == JobGate::Taken) {
        ++stats_.rejects;
        rec.phase = Phase::Aborted;
        return;
    }

    // Conflict detection: any strictly better active proposal for the same
    // job (lower cost, or equal cost with smaller proposer id) wins.
    bool better_exists = false;
    ProposalRecord* own_worse = nullptr;
    for (auto& [pid, other] : records_) {
        if (other.job_id != msg.job_id || pid == rec.id || !other.active()) continue;
        if (proposal_beats(other.cost, other.proposer, rec.cost, rec.proposer)) {
            better_exists = true;
        } else if (other.direction == Direction::Outgoing) {
            own_worse = &other;
        }
    }

    if (better_exists) {
        ++stats_.rejects;
        drain_buffered(rec.id, now);
        advance(rec, now);
        return;
    }

    if (own_worse) {
        // Early abort: withdraw the losing round without waiting for timeout.
        abort_own(*own_worse, now, /*timeout=*/false);
    }

    rec.endorsed = true;
    rec.prepare_votes.insert(self_);
    ConsensusMessage prep;
    prep.kind = MsgKind::Prepare;
    prep.proposal_id = msg.proposal_id;
    prep.job_id = msg.job_id;
    prep.proposer = msg.proposer;
    prep.sender = self_;
    ++stats_.prepares_sent;
    hooks_.broadcast(prep);

    drain_buffered(rec.id, now);
    advance(rec, now);
}

void Engine::handle_vote(const ConsensusMessage& msg, SimTime now) {
    auto it = records_.find(msg.proposal_id);
    if (it == records_.end()) {
        buffered_[msg.proposal_id].emplace_back(msg, now);
        return;
    }
    ProposalRecord& rec = it->second;
    if (!rec.active()) {
        ++stats_.stale_messages;  // pipelining makes stragglers routine
        return;
    }
    if (msg.kind == MsgKind::Prepare) {
        rec.prepare_votes.insert(msg.sender);
    } else {
        rec.commit_votes.insert(msg.sender);
    }
    advance(rec, now);
}

void Engine::advance(ProposalRecord& rec, SimTime now) {
    if (!rec.active()) return;
    // Quorum is re-read on every vote-count check so in-flight proposals
    // adopt membership changes; finalized ones are never revisited.
    const QuorumView qv = hooks_.quorum ? hooks_.quorum() : QuorumView{};

    if (!rec.commit_broadcast && rec.endorsed &&
        static_cast<int>(rec.prepare_votes.size()) >= qv.q) {
        rec.commit_broadcast = true;
        if (rec.phase == Phase::Proposing || rec.phase == Phase::Preparing) {
            rec.phase = Phase::Committing;
            rec.phase_entered_at = now;
        }
        rec.commit_votes.insert(self_);
        ConsensusMessage commit;
        commit.kind = MsgKind::Commit;
        commit.proposal_id = rec.id;
        commit.job_id = rec.job_id;
        commit.proposer = rec.proposer;
        commit.sender = self_;
        ++stats_.commits_sent;
        hooks_.broadcast(commit);
    }

    if (static_cast<int>(rec.commit_votes.size()) >= qv.q) {
        rec.phase = Phase::Done;
        rec.phase_entered_at = now;
        if (rec.direction == Direction::Outgoing) {
            outgoing_by_job_.erase(rec.job_id);
            if (hooks_.on_win) hooks_.on_win(rec);
        } else {
            if (hooks_.on_peer_decided) hooks_.on_peer_decided(rec);
        }
    }
}

void Engine::abort_own(ProposalRecord& rec, SimTime now, bool timeout) {
    rec.phase = Phase::Aborted;
    rec.phase_entered_at = now;
    outgoing_by_job_.erase(rec.job_id);
    if (timeout) {
        ++stats_.timeout_aborts;
    } else {
        ++stats_.early_aborts;
    }
    if (hooks_.on_own_abort) hooks_.on_own_abort(rec.job_id, rec.phase);
}

void Engine::drain_buffered(const ProposalId& pid, SimTime now) {
    auto it = buffered_.find(pid);
    if (it == buffered_.end()) return;
    auto msgs = std::move(it->second);
    buffered_.erase(it);
    for (auto& [msg, at] : msgs) {
        if (to_seconds(now - at) > cfg_.ooo_buffer_s) {
            ++stats_.buffered_dropped;
            continue;
        }
        handle_vote(msg, now);
    }
}

void Engine::tick(SimTime now) {
    for (auto& [pid, rec] : records_) {
        if (!rec.active()) continue;
        if (to_seconds(now - rec.phase_entered_at) <= cfg_.phase_timeout_s) continue;
        if (rec.direction == Direction::Outgoing) {
            abort_own(rec, now, /*timeout=*/true);
        } else {
            rec.phase = Phase::Aborted;
            rec.phase_entered_at = now;
        }
    }

    for (auto it = buffered_.begin(); it != buffered_.end();) {
        auto& vec = it->second;
        std::erase_if(vec, [&](const auto& entry) {
            bool expired = to_seconds(now - entry.second) > cfg_.ooo_buffer_s;
            if (expired) ++stats_.buffered_dropped;
            return expired;
        });
        it = vec.empty() ? buffered_.erase(it) : std::next(it);
    }

    for (auto it = records_.begin(); it != records_.end();) {
        const ProposalRecord& rec = it->second;
        bool prune = !rec.active() &&
                     to_seconds(now - rec.phase_entered_at) > cfg_.prune_after_s;
        it = prune ? records_.erase(it) : std::next(it);
    }
}

}  // namespace accord::consensus
