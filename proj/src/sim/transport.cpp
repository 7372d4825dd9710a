#include "accord/sim/transport.hpp"

namespace accord::sim {

Transport::Transport(SimClock& clock, LatencyModel& latency, TransportConfig cfg)
    : clock_(clock), latency_(latency), cfg_(cfg) {}

void Transport::open_channel(const AgentId& a, const AgentId& b) {
    if (a == b) return;
    channels_.insert(key(a, b));
}

bool Transport::has_channel(const AgentId& a, const AgentId& b) const {
    return channels_.count(key(a, b)) > 0;
}

const Transport::LinkFault* Transport::active_fault(const AgentId& a, const AgentId& b,
                                                    SimTime at) const {
    auto it = faults_.find(key(a, b));
    if (it == faults_.end()) return nullptr;
    for (const auto& f : it->second) {
        if (at >= f.from && at < f.until) return &f;
    }
    return nullptr;
}

SimDuration Transport::probe_trip_delay() const {
    return from_millis(cfg_.channel_probe_interval_ms * cfg_.probe_failures_to_trip);
}

void Transport::send(const AgentId& from, const AgentId& to, Envelope env) {
    if (from == to) {  // loopback, zero delay
        ++sent_;
        if (on_transmit) on_transmit(env);
        Envelope copy = std::move(env);
        AgentId target = to;
        clock_.schedule(clock_.now(), [this, target, copy = std::move(copy)]() {
            if (is_crashed && is_crashed(target)) return;
            deliver(target, copy);
        });
        return;
    }

    const LinkFault* fault = active_fault(from, to, clock_.now());
    if (fault && fault->extra_ms <= 0.0) {
        ++dropped_;
        return;  // partitioned: silently dropped, probes trip separately
    }

    SimDuration delay = latency_.one_way(site_of(from), site_of(to));
    if (fault) delay += from_millis(fault->extra_ms);

    // Stream channels deliver in send order per direction.
    SimTime at = clock_.now() + delay;
    auto& last = last_delivery_[{from, to}];
    if (at <= last) at = last + 1;
    last = at;

    ++sent_;
    if (on_transmit) on_transmit(env);
    AgentId target = to;
    clock_.schedule(at, [this, target, env = std::move(env)]() {
        if (is_crashed && is_crashed(target)) return;
        deliver(target, env);
    });
}

void Transport::crash(const AgentId& agent) {
    // Connection teardown propagates to every peer with an open channel.
    const SimDuration base = from_millis(cfg_.channel_event_delay_ms);
    for (const auto& [a, b] : channels_) {
        if (a != agent && b != agent) continue;
        AgentId peer = (a == agent) ? b : a;
        if (is_crashed && is_crashed(peer)) continue;
        SimDuration hop = latency_.one_way(site_of(agent), site_of(peer));
        AgentId dead = agent;
        clock_.schedule_in(base + hop, [this, peer, dead]() {
            if (is_crashed && is_crashed(peer)) return;
            if (channel_event) channel_event(peer, dead, /*up=*/false, clock_.now());
        });
    }
}

void Transport::partition(const AgentId& a, const AgentId& b, SimTime from, SimTime until) {
    faults_[key(a, b)].push_back(LinkFault{from, until, 0.0});
    if (!has_channel(a, b)) return;
    SimTime down_at = from + probe_trip_delay();
    SimTime up_at = until + from_millis(cfg_.channel_event_delay_ms);
    for (const auto& [observer, peer] : {std::pair{a, b}, std::pair{b, a}}) {
        AgentId obs = observer, p = peer;
        clock_.schedule(down_at, [this, obs, p, until]() {
            if (clock_.now() >= until) return;  // healed before probes tripped
            if (is_crashed && (is_crashed(obs) || is_crashed(p))) return;
            if (channel_event) channel_event(obs, p, /*up=*/false, clock_.now());
        });
        clock_.schedule(up_at, [this, obs, p]() {
            if (is_crashed && (is_crashed(obs) || is_crashed(p))) return;
            if (channel_event) channel_event(obs, p, /*up=*/true, clock_.now());
        });
    }
}

void Transport::inject_delay(const AgentId& a, const AgentId& b, SimTime from, SimTime until,
                             double extra_ms) {
    faults_[key(a, b)].push_back(LinkFault{from, until, extra_ms});
    // Delays past the probe deadline look like a dead channel until they
    // clear, producing a false-positive down event.
    if (extra_ms > cfg_.channel_probe_interval_ms && has_channel(a, b)) {
        SimTime down_at = from + probe_trip_delay();
        SimTime up_at = until + from_millis(cfg_.channel_event_delay_ms);
        for (const auto& [observer, peer] : {std::pair{a, b}, std::pair{b, a}}) {
            AgentId obs = observer, p = peer;
            clock_.schedule(down_at, [this, obs, p, until]() {
                if (clock_.now() >= until) return;
                if (is_crashed && (is_crashed(obs) || is_crashed(p))) return;
                if (channel_event) channel_event(obs, p, /*up=*/false, clock_.now());
            });
            clock_.schedule(up_at, [this, obs, p]() {
                if (is_crashed && (is_crashed(obs) || is_crashed(p))) return;
                if (channel_event) channel_event(obs, p, /*up=*/true, clock_.now());
            });
        }
    }
}

}  // namespace accord::sim
