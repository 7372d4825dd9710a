#include <doctest.h>

#include <cmath>

#include "accord/core/rng.hpp"
#include "accord/resilience/detector.hpp"

using namespace accord;
using namespace accord::resilience;

namespace {

double jitter_of(const AgentId& id) {
    return (static_cast<double>(fnv1a_str(id) % 2000001) / 1000000.0) - 1.0;
}

}  // namespace

TEST_CASE("detector config validation") {
    DetectorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.heartbeat_threshold_s = 5.0;  // below interval
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("fallback: heartbeat age past the jittered threshold declares death") {
    DetectorConfig cfg;
    FailureDetector det("a000", cfg, 0.0);  // no jitter: threshold exactly 45s
    det.observe_heartbeat("a001", from_seconds(0), 1);

    auto c1 = det.sweep(from_seconds(44));
    CHECK(c1.died.empty());
    CHECK(det.is_live("a001"));

    auto c2 = det.sweep(from_seconds(50));  // age 50 > 45
    CHECK(c2.died == std::vector<AgentId>{"a001"});
    CHECK_FALSE(det.is_live("a001"));
    // the expiry signal is the exact crossing instant, for latency reporting
    CHECK(det.peers().at("a001").heartbeat_expiry_at == from_seconds(45));
}

TEST_CASE("per-agent thresholds are jittered by at most 10% and differ") {
    DetectorConfig cfg;
    double lo = cfg.heartbeat_threshold_s * 0.9;
    double hi = cfg.heartbeat_threshold_s * 1.1;
    bool saw_difference = false;
    double first = 0;
    for (int i = 0; i < 20; ++i) {
        AgentId id = "a00" + std::to_string(i);
        FailureDetector det(id, cfg, jitter_of(id));
        CHECK(det.threshold_s() >= lo);
        CHECK(det.threshold_s() <= hi);
        if (i == 0) first = det.threshold_s();
        if (det.threshold_s() != first) saw_difference = true;
        // deterministic per agent
        FailureDetector again(id, cfg, jitter_of(id));
        CHECK(again.threshold_s() == det.threshold_s());
    }
    CHECK(saw_difference);
}

TEST_CASE("fast path: channel-down declares death immediately") {
    DetectorConfig cfg;
    FailureDetector det("a000", cfg, 0.0);
    det.observe_heartbeat("a001", from_seconds(0), 1);
    det.on_channel("a001", false, from_millis(5015));
    auto change = det.sweep(from_millis(5020));
    CHECK(change.died == std::vector<AgentId>{"a001"});
    CHECK(det.peers().at("a001").channel_signal_at == from_millis(5015));
}

TEST_CASE("fast path disabled: channel-down events do not declare death") {
    DetectorConfig cfg;
    cfg.fast_path_enabled = false;
    FailureDetector det("a000", cfg, 0.0);
    det.observe_heartbeat("a001", from_seconds(0), 1);
    det.on_channel("a001", false, from_seconds(1));
    CHECK(det.sweep(from_seconds(2)).died.empty());
    CHECK(det.is_live("a001"));
    // the fallback still catches it within threshold + interval
    CHECK_FALSE(det.sweep(from_seconds(46)).died.empty());
}

TEST_CASE("false positive: a declared-dead peer that heartbeats again is re-admitted") {
    DetectorConfig cfg;
    FailureDetector det("a000", cfg, 0.0);
    det.observe_heartbeat("a001", from_seconds(0), 1);
    det.on_channel("a001", false, from_seconds(1));  // transient blip
    auto died = det.sweep(from_seconds(1));
    CHECK(died.died.size() == 1);

    det.on_channel("a001", true, from_seconds(2));
    det.observe_heartbeat("a001", from_seconds(3), 2);
    auto revived = det.sweep(from_seconds(4));
    CHECK(revived.revived == std::vector<AgentId>{"a001"});
    CHECK(det.is_live("a001"));
}

TEST_CASE("stale heartbeats never roll the clock backwards") {
    DetectorConfig cfg;
    FailureDetector det("a000", cfg, 0.0);
    det.observe_heartbeat("a001", from_seconds(10), 2);
    det.observe_heartbeat("a001", from_seconds(5), 1);  // out-of-date scan replay
    CHECK(det.peers().at("a001").last_heartbeat_written == from_seconds(10));
}

TEST_CASE("declaring peers dead never increases the quorum requirement") {
    // quorum monotonicity over the liveness view: killing a member can only
    // shrink n_live, and q = ceil((n+1)/2) is monotone in n
    DetectorConfig cfg;
    FailureDetector det("a000", cfg, 0.0);
    for (int i = 1; i <= 9; ++i) {
        det.observe_heartbeat("a00" + std::to_string(i), from_seconds(0), 1);
    }
    auto live_count = [&]() {
        int n = 1;
        for (const auto& [id, p] : det.peers()) {
            if (det.is_live(id)) ++n;
        }
        return n;
    };
    int q_before = (live_count() + 2) / 2;
    det.on_channel("a001", false, from_seconds(1));
    det.sweep(from_seconds(1));
    int q_after = (live_count() + 2) / 2;
    CHECK(q_after <= q_before);

    // a join can only grow n_live, so q never shrinks from a join
    det.observe_heartbeat("a010", from_seconds(2), 1);
    det.sweep(from_seconds(2));
    CHECK((live_count() + 2) / 2 >= q_after);
}
