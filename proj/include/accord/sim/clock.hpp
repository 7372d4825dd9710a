#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "accord/core/time.hpp"

namespace accord::sim {

// Deterministic discrete-event clock. Events at equal times fire in
// insertion order; time never moves backward.
class SimClock {
public:
    using Callback = std::function<void()>;

    SimTime now() const { return now_; }

    void schedule(SimTime at, Callback fn) {
        if (at < now_) at = now_;
        queue_.push(Ev{at, next_seq_++, std::move(fn)});
    }

    void schedule_in(SimDuration delay, Callback fn) { schedule(now_ + delay, std::move(fn)); }

    bool empty() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }
    SimTime peek_time() const { return queue_.top().at; }

    // Runs the next event; returns false when the queue is empty.
    bool step() {
        if (queue_.empty()) return false;
        // top() only hands out const access; the callback has to move out
        // through the mutable reference below.
        Ev ev = std::move(const_cast<Ev&>(queue_.top()));
        queue_.pop();
        now_ = ev.at;
        ev.fn();
        return true;
    }

    std::uint64_t events_processed() const { return next_seq_ - queue_.size(); }

private:
    struct Ev {
        SimTime at;
        std::uint64_t seq;
        Callback fn;
    };
    struct Later {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Ev, std::vector<Ev>, Later> queue_;
};

}  // namespace accord::sim
