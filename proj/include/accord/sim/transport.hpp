#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "accord/core/message.hpp"
#include "accord/sim/clock.hpp"
#include "accord/sim/latency.hpp"

namespace accord::sim {

// Wire unit. relay_id + ttl implement scoped flooding on overlays where the
// consensus group is only reachable through multi-hop links.
struct Envelope {
    std::shared_ptr<const ConsensusMessage> msg;
    AgentId from;  // immediate hop sender
    AgentId origin;
    std::uint64_t relay_id = 0;
    int ttl = 0;  // remaining relay hops; 0 disables relaying
};

struct TransportConfig {
    double channel_probe_interval_ms = 1000.0;
    int probe_failures_to_trip = 3;
    double channel_event_delay_ms = 15.0;
};

// Message fabric between agent pairs with per-link latency, per-ordered-pair
// FIFO delivery, crash/partition/delay injection and channel-state
// callbacks. Probes are not simulated message-by-message; their effect is a
// channel-down event scheduled when a link goes silent.
class Transport {
public:
    Transport(SimClock& clock, LatencyModel& latency, TransportConfig cfg);

    // Wiring supplied by the world.
    std::function<SiteId(const AgentId&)> site_of;
    std::function<bool(const AgentId&)> is_crashed;
    std::function<void(const AgentId& to, const Envelope&)> deliver;
    std::function<void(const AgentId& observer, const AgentId& peer, bool up, SimTime at)>
        channel_event;
    // Per-delivered-message accounting hook (counts each transmission).
    std::function<void(const Envelope&)> on_transmit;

    void open_channel(const AgentId& a, const AgentId& b);
    bool has_channel(const AgentId& a, const AgentId& b) const;

    void send(const AgentId& from, const AgentId& to, Envelope env);

    // fault injection
    void crash(const AgentId& agent);  // call at the crash instant
    void partition(const AgentId& a, const AgentId& b, SimTime from, SimTime until);
    void inject_delay(const AgentId& a, const AgentId& b, SimTime from, SimTime until,
                      double extra_ms);

    std::uint64_t messages_sent() const { return sent_; }
    std::uint64_t messages_dropped() const { return dropped_; }

private:
    struct LinkFault {
        SimTime from = 0;
        SimTime until = 0;
        double extra_ms = 0.0;  // 0 => full partition
    };

    static std::pair<AgentId, AgentId> key(const AgentId& a, const AgentId& b) {
        return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    const LinkFault* active_fault(const AgentId& a, const AgentId& b, SimTime at) const;
    SimDuration probe_trip_delay() const;

    SimClock& clock_;
    LatencyModel& latency_;
    TransportConfig cfg_;
    std::set<std::pair<AgentId, AgentId>> channels_;
    std::map<std::pair<AgentId, AgentId>, std::vector<LinkFault>> faults_;
    std::map<std::pair<AgentId, AgentId>, SimTime> last_delivery_;  // ordered pairs
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

}  // namespace accord::sim
