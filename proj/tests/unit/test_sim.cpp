#include <doctest.h>

#include <map>

#include "accord/sim/clock.hpp"
#include "accord/sim/latency.hpp"
#include "accord/sim/store.hpp"
#include "accord/sim/transport.hpp"

using namespace accord;
using namespace accord::sim;

TEST_CASE("clock fires equal-time events in insertion order and time is monotone") {
    SimClock clock;
    std::vector<int> order;
    clock.schedule(100, [&]() { order.push_back(1); });
    clock.schedule(100, [&]() { order.push_back(2); });
    clock.schedule(50, [&]() { order.push_back(0); });
    clock.schedule(100, [&]() { order.push_back(3); });
    SimTime last = 0;
    while (clock.step()) {
        CHECK(clock.now() >= last);
        last = clock.now();
    }
    CHECK(order == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("events scheduled in the past run now, never backwards") {
    SimClock clock;
    clock.schedule(1000, [&]() { clock.schedule(500, []() {}); });
    clock.step();
    CHECK(clock.peek_time() == 1000);
}

TEST_CASE("latency model: intra-site delay in the configured band") {
    LatencyConfig cfg;
    cfg.sites = {"tacc"};
    LatencyModel lm(cfg, 99);
    double rtt = lm.rtt_ms("tacc", "tacc");
    CHECK(rtt >= 1.2);
    CHECK(rtt <= 2.0);
    // one-way = RTT/2 with zero default jitter: within [0.6, 1.0] ms
    for (int i = 0; i < 20; ++i) {
        SimDuration d = lm.one_way("tacc", "tacc");
        CHECK(d >= from_millis(0.6));
        CHECK(d <= from_millis(1.0));
    }
}

TEST_CASE("latency model: inter-site from matrix, symmetric") {
    LatencyConfig cfg;
    cfg.sites = {"ucsd", "losa"};
    cfg.inter_rtt_ms[{"ucsd", "losa"}] = 10.0;
    cfg.store_site = "ucsd";
    LatencyModel lm(cfg, 1);
    CHECK(lm.rtt_ms("ucsd", "losa") == 10.0);
    CHECK(lm.rtt_ms("losa", "ucsd") == 10.0);
    CHECK(lm.store_round_trip("losa") == from_millis(10.0));
}

namespace {

struct Harness {
    SimClock clock;
    LatencyModel latency;
    Transport transport;
    std::map<AgentId, std::vector<std::pair<SimTime, std::uint64_t>>> delivered;
    std::vector<std::tuple<AgentId, AgentId, bool, SimTime>> channel_events;
    std::map<AgentId, bool> crashed;

    explicit Harness(TransportConfig tcfg = {})
        : latency(
              []() {
                  LatencyConfig c;
                  c.sites = {"s"};
                  return c;
              }(),
              7),
          transport(clock, latency, tcfg) {
        transport.site_of = [](const AgentId&) { return SiteId{"s"}; };
        transport.is_crashed = [this](const AgentId& id) {
            auto it = crashed.find(id);
            return it != crashed.end() && it->second;
        };
        transport.deliver = [this](const AgentId& to, const Envelope& env) {
            delivered[to].emplace_back(clock.now(), env.msg->proposal_id.counter);
        };
        transport.channel_event = [this](const AgentId& o, const AgentId& p, bool up,
                                         SimTime at) {
            channel_events.emplace_back(o, p, up, at);
        };
    }

    Envelope env(std::uint64_t n) {
        auto msg = std::make_shared<ConsensusMessage>();
        msg->proposal_id = ProposalId{"x", n};
        Envelope e;
        e.msg = msg;
        return e;
    }

    void run() {
        while (clock.step()) {
        }
    }
};

}  // namespace

TEST_CASE("per-ordered-pair FIFO delivery") {
    Harness h;
    h.transport.open_channel("a", "b");
    for (std::uint64_t i = 0; i < 50; ++i) h.transport.send("a", "b", h.env(i));
    h.run();
    const auto& got = h.delivered["b"];
    REQUIRE(got.size() == 50);
    for (std::uint64_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].second == i);
        if (i > 0) CHECK(got[i].first >= got[i - 1].first);
    }
}

TEST_CASE("self-send delivers with zero delay") {
    Harness h;
    h.clock.schedule(123, [&]() { h.transport.send("a", "a", h.env(0)); });
    h.run();
    REQUIRE(h.delivered["a"].size() == 1);
    CHECK(h.delivered["a"][0].first == 123);
}

TEST_CASE("partitioned pairs drop messages and trip a channel-down event") {
    TransportConfig tcfg;
    tcfg.channel_probe_interval_ms = 100;
    tcfg.probe_failures_to_trip = 3;
    Harness h(tcfg);
    h.transport.open_channel("a", "b");
    h.transport.partition("a", "b", from_seconds(1), from_seconds(10));

    h.clock.schedule(from_seconds(2), [&]() { h.transport.send("a", "b", h.env(1)); });
    h.run();
    CHECK(h.delivered["b"].empty());
    CHECK(h.transport.messages_dropped() == 1);

    // down events for both observers after 3 probe intervals
    int down = 0, up = 0;
    for (const auto& [obs, peer, is_up, at] : h.channel_events) {
        if (!is_up) {
            ++down;
            CHECK(at == from_seconds(1) + from_millis(300));
        } else {
            ++up;
            CHECK(at >= from_seconds(10));
        }
    }
    CHECK(down == 2);
    CHECK(up == 2);
}

TEST_CASE("short partitions that heal before the probes trip stay silent") {
    TransportConfig tcfg;
    tcfg.channel_probe_interval_ms = 1000;
    tcfg.probe_failures_to_trip = 3;
    Harness h(tcfg);
    h.transport.open_channel("a", "b");
    h.transport.partition("a", "b", from_seconds(1), from_seconds(2));  // 1s < 3s trip
    h.run();
    for (const auto& [obs, peer, is_up, at] : h.channel_events) CHECK(is_up);
}

TEST_CASE("crash notifies every channel peer after the propagation delay") {
    TransportConfig tcfg;
    tcfg.channel_event_delay_ms = 15;
    Harness h(tcfg);
    h.transport.open_channel("a", "b");
    h.transport.open_channel("a", "c");
    h.clock.schedule(from_seconds(5), [&]() {
        h.crashed["a"] = true;
        h.transport.crash("a");
    });
    h.run();
    REQUIRE(h.channel_events.size() == 2);
    for (const auto& [obs, peer, up, at] : h.channel_events) {
        CHECK(peer == "a");
        CHECK_FALSE(up);
        // 15 ms event delay plus one intra-site hop
        CHECK(at >= from_seconds(5) + from_millis(15));
        CHECK(at <= from_seconds(5) + from_millis(17));
    }
}

TEST_CASE("messages to a crashed agent are dropped at delivery") {
    Harness h;
    h.transport.open_channel("a", "b");
    h.transport.send("a", "b", h.env(0));
    h.crashed["b"] = true;  // crashes while the message is in flight
    h.run();
    CHECK(h.delivered["b"].empty());
}

TEST_CASE("store CAS: create, conflict, versioned update") {
    SharedStore store;
    Job job;
    job.id = "j1";
    job.version = 1;
    JobRecord rec{job, "", "g0", 0};

    SUBCASE("create on absent key with no expected version") {
        auto out = store.cas_job("j1", std::nullopt, rec, "a0", 0);
        CHECK(out.ok);
        // second create fails
        auto dup = store.cas_job("j1", std::nullopt, rec, "a1", 1);
        CHECK_FALSE(dup.ok);
    }

    SUBCASE("stale version conflicts") {
        store.cas_job("j1", std::nullopt, rec, "a0", 0);
        JobRecord next = rec;
        next.job.version = 2;
        CHECK(store.cas_job("j1", 1, next, "a0", 1).ok);
        // replay with the old expected version
        CHECK_FALSE(store.cas_job("j1", 1, next, "a1", 2).ok);
    }

    SUBCASE("two racing commits: exactly one Ok") {
        store.cas_job("j1", std::nullopt, rec, "harness", 0);
        JobRecord w1 = rec;
        w1.job.version = 5;
        w1.winner = "a0";
        JobRecord w2 = rec;
        w2.job.version = 5;
        w2.winner = "a1";
        bool ok1 = store.cas_job("j1", 1, w1, "a0", 10).ok;
        bool ok2 = store.cas_job("j1", 1, w2, "a1", 10).ok;
        CHECK(ok1);
        CHECK_FALSE(ok2);
        CHECK(store.read_job("j1")->winner == "a0");
    }
}

TEST_CASE("store CAS log admits a sequential witness") {
    // replay every logged operation against a plain map in log order; each
    // outcome must match, which is exactly a linearization witness for the
    // single-threaded store
    SharedStore store;
    Job job;
    job.id = "j";
    job.version = 1;
    store.cas_job("j", std::nullopt, {job, "", "g", 0}, "h", 0);
    for (int i = 0; i < 20; ++i) {
        auto cur = store.read_job("j");
        Job next = cur->job;
        next.touch();
        // half the attempts carry a stale expected version
        std::uint64_t expected = (i % 2 == 0) ? cur->job.version : cur->job.version + 7;
        store.cas_job("j", expected, {next, "", "g", 0}, "a", i);
    }

    std::map<JobId, std::uint64_t> witness;
    for (const auto& e : store.cas_log()) {
        auto it = witness.find(e.job);
        bool would_succeed = (it == witness.end() && e.expected == 0) ||
                             (it != witness.end() && it->second == e.expected);
        CHECK(e.ok == would_succeed);
        if (e.ok) witness[e.job] = e.expected == 0 ? 1 : e.expected + 1;
    }
}

TEST_CASE("pool delta scans return only changes past the cursor") {
    SharedStore store;
    auto put = [&](const std::string& id, std::uint64_t version) {
        Job j;
        j.id = id;
        j.version = version;
        if (version == 1) {
            store.cas_job(id, std::nullopt, {j, "", "g0", 0}, "h", 0);
        } else {
            store.cas_job(id, version - 1, {j, "", "g0", 0}, "h", 0);
        }
    };
    put("j1", 1);
    put("j2", 1);
    auto d1 = store.scan_pool("g0", 0);
    CHECK(d1.changed.size() == 2);

    auto d2 = store.scan_pool("g0", d1.upto);
    CHECK(d2.changed.empty());

    put("j1", 2);
    auto d3 = store.scan_pool("g0", d1.upto);
    REQUIRE(d3.changed.size() == 1);
    CHECK(d3.changed[0].job.id == "j1");
    CHECK(d3.changed[0].job.version == 2);
}

TEST_CASE("pool moves show up in both namespaces") {
    SharedStore store;
    Job j;
    j.id = "j1";
    j.version = 1;
    store.cas_job("j1", std::nullopt, {j, "", "parent", 0}, "h", 0);
    auto base = store.scan_pool("parent", 0);

    Job moved = j;
    moved.touch();
    store.cas_job("j1", 1, {moved, "", "child", 0}, "c0", 1);

    auto parent_delta = store.scan_pool("parent", base.upto);
    REQUIRE(parent_delta.changed.size() == 1);
    CHECK(parent_delta.changed[0].pool == "child");  // scanner drops it

    auto child_delta = store.scan_pool("child", 0);
    REQUIRE(child_delta.changed.size() == 1);
    CHECK(child_delta.changed[0].job.id == "j1");
}

TEST_CASE("heartbeat deltas are group-scoped") {
    SharedStore store;
    HeartbeatRecord hb;
    hb.id = "a0";
    hb.group = "g0";
    hb.written_at = 10;
    store.put_heartbeat(hb);
    hb.id = "b0";
    hb.group = "g1";
    store.put_heartbeat(hb);

    auto d0 = store.scan_heartbeats("g0", 0);
    REQUIRE(d0.changed.size() == 1);
    CHECK(d0.changed[0].id == "a0");

    auto d1 = store.scan_heartbeats("g0", d0.upto);
    CHECK(d1.changed.empty());
}

TEST_CASE("delegation records: adoption CAS and unconditional put") {
    SharedStore store;
    StoredDelegation d;
    d.record = {"j1", "g0", 0, 30.0};
    d.owner = "b0";
    store.put_delegation("top", "j1", d);
    auto scan = store.scan_delegations("top");
    REQUIRE(scan.size() == 1);
    CHECK(scan[0].version == 1);

    StoredDelegation adopted = scan[0];
    adopted.owner = "b1";
    CHECK(store.cas_delegation("top", "j1", 1, adopted).ok);
    CHECK_FALSE(store.cas_delegation("top", "j1", 1, adopted).ok);  // stale
    CHECK(store.scan_delegations("top")[0].owner == "b1");

    // delete with the current version
    CHECK(store.cas_delegation("top", "j1", 2, std::nullopt).ok);
    CHECK(store.scan_delegations("top").empty());
}
