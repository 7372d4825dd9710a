#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "accord/core/agent_state.hpp"
#include "accord/core/time.hpp"

namespace accord::resilience {

struct DetectorConfig {
    double heartbeat_interval_s = 10.0;
    double heartbeat_threshold_s = 45.0;
    double threshold_jitter_frac = 0.10;  // per-agent, prevents thundering herd
    double channel_probe_interval_ms = 1000.0;
    int probe_failures_to_trip = 3;
    double channel_event_delay_ms = 15.0;
    bool fast_path_enabled = true;

    void validate() const {
        if (heartbeat_threshold_s <= heartbeat_interval_s) {
            throw std::invalid_argument("heartbeat threshold must exceed the interval");
        }
        if (probe_failures_to_trip < 1) {
            throw std::invalid_argument("probe_failures_to_trip must be >= 1");
        }
    }
};

struct PeerLiveness {
    SimTime last_heartbeat_written = -1;  // store timestamp, -1 = never seen
    std::uint64_t last_version = 0;
    bool channel_down = false;
    std::optional<SimTime> declared_dead_at;
    // Signal bookkeeping for detection-latency reporting. Both paths are
    // recorded even when the other one already declared the peer dead.
    std::optional<SimTime> channel_signal_at;
    std::optional<SimTime> heartbeat_expiry_at;
};

struct LivenessChange {
    std::vector<AgentId> died;
    std::vector<AgentId> revived;  // false positives that heartbeat again
};

// Multi-signal failure detection for one observing agent: transport channel
// state as the fast path, heartbeat expiry with a jittered threshold as the
// fallback.
class FailureDetector {
public:
    FailureDetector(AgentId self, DetectorConfig cfg, double jitter_unit);

    // Jittered fallback threshold for this observer.
    double threshold_s() const { return threshold_s_; }

    void observe_heartbeat(const AgentId& peer, SimTime written_at, std::uint64_t version);
    void on_channel(const AgentId& peer, bool up, SimTime now);
    void forget(const AgentId& peer) { peers_.erase(peer); }

    // Evaluates both signals; returns peers that changed liveness.
    LivenessChange sweep(SimTime now);

    bool is_live(const AgentId& peer) const;
    bool knows(const AgentId& peer) const { return peers_.count(peer) > 0; }
    const std::map<AgentId, PeerLiveness>& peers() const { return peers_; }

private:
    AgentId self_;
    DetectorConfig cfg_;
    double threshold_s_;
    std::map<AgentId, PeerLiveness> peers_;
};

}  // namespace accord::resilience
