#include "accord/resilience/detector.hpp"

namespace accord::resilience {

FailureDetector::FailureDetector(AgentId self, DetectorConfig cfg, double jitter_unit)
    : self_(std::move(self)), cfg_(cfg) {
    if (jitter_unit < -1.0) jitter_unit = -1.0;
    if (jitter_unit > 1.0) jitter_unit = 1.0;
    threshold_s_ = cfg_.heartbeat_threshold_s * (1.0 + cfg_.threshold_jitter_frac * jitter_unit);
}

void FailureDetector::observe_heartbeat(const AgentId& peer, SimTime written_at,
                                        std::uint64_t version) {
    if (peer == self_) return;
    PeerLiveness& p = peers_[peer];
    if (written_at <= p.last_heartbeat_written) return;
    p.last_heartbeat_written = written_at;
    p.last_version = version;
}

void FailureDetector::on_channel(const AgentId& peer, bool up, SimTime now) {
    if (peer == self_) return;
    auto it = peers_.find(peer);
    if (it == peers_.end() && up) return;
    PeerLiveness& p = peers_[peer];
    p.channel_down = !up;
    if (!up && !p.channel_signal_at) p.channel_signal_at = now;
    if (up) p.channel_signal_at.reset();
}

bool FailureDetector::is_live(const AgentId& peer) const {
    auto it = peers_.find(peer);
    if (it == peers_.end()) return false;
    return !it->second.declared_dead_at.has_value();
}

LivenessChange FailureDetector::sweep(SimTime now) {
    LivenessChange out;
    for (auto& [peer, p] : peers_) {
        if (p.last_heartbeat_written < 0) continue;  // never registered

        const double hb_age = to_seconds(now - p.last_heartbeat_written);
        const bool hb_stale = hb_age > threshold_s_;
        if (hb_stale && !p.heartbeat_expiry_at) {
            // expiry instant, kept exact for latency reporting
            p.heartbeat_expiry_at = p.last_heartbeat_written + from_seconds(threshold_s_);
        }
        if (!hb_stale) p.heartbeat_expiry_at.reset();

        const bool channel_dead = cfg_.fast_path_enabled && p.channel_down;

        if (!p.declared_dead_at) {
            if (channel_dead || hb_stale) {
                p.declared_dead_at = now;
                out.died.push_back(peer);
            }
        } else {
            // A declared-dead peer that heartbeats again was a false
            // positive; it is re-admitted as a fresh join.
            bool heard_since = p.last_heartbeat_written > *p.declared_dead_at;
            if (heard_since && !channel_dead) {
                p.declared_dead_at.reset();
                p.heartbeat_expiry_at.reset();
                out.revived.push_back(peer);
            }
        }
    }
    return out;
}

}  // namespace accord::resilience
