#include <doctest.h>

#include <cmath>
#include <cstring>

#include "accord/core/rng.hpp"
#include "accord/selection/candidate.hpp"
#include "accord/selection/cost_cache.hpp"
#include "accord/selection/cost_model.hpp"

using namespace accord;
using namespace accord::selection;

namespace {

AgentState make_agent(const AgentId& id, ResourceVector avail) {
    AgentState a;
    a.id = id;
    a.capacity = avail;
    a.available = avail;
    a.live = true;
    return a;
}

Job make_job(const JobId& id, ResourceVector req, double walltime = 10.0) {
    Job j;
    j.id = id;
    j.requirements = req;
    j.walltime_s = walltime;
    return j;
}

}  // namespace

TEST_CASE("feasibility over available resources") {
    CostParams params;
    AgentState large = make_agent("a0", {8, 32, 500, 4});
    Job heavy = make_job("j0", {4, 16, 50, 4});
    CHECK(feasible(large, heavy, params));

    AgentState small = make_agent("a1", {2, 8, 100, 0});
    Job gpu = make_job("j1", {1, 1, 1, 1});
    CHECK_FALSE(feasible(small, gpu, params));

    AgentState dead = make_agent("a2", {8, 32, 500, 4});
    dead.live = false;
    CHECK_FALSE(feasible(dead, heavy, params));
}

TEST_CASE("connectivity feasibility: permissive by default, strict on request") {
    CostParams params;
    AgentState a = make_agent("a0", {4, 16, 250, 0});
    Job j = make_job("j0", {1, 1, 1, 0});
    j.data_in = {{"d1", "f"}};

    CHECK(conn_feasible(a, j, params));  // permissive: penalized, not rejected

    params.strict_connectivity = true;
    CHECK_FALSE(conn_feasible(a, j, params));
    a.connectivity.scores["d1"] = 0.7;
    CHECK(conn_feasible(a, j, params));

    Job no_data = make_job("j1", {1, 1, 1, 0});
    CHECK(conn_feasible(make_agent("a1", {1, 1, 1, 0}), no_data, params));
}

TEST_CASE("connectivity penalty endpoints and midpoint") {
    CostParams params;  // beta = 1.0
    Job j = make_job("j0", {1, 1, 1, 0});
    j.data_in = {{"d1", "f"}};

    AgentState perfect = make_agent("a0", {4, 16, 250, 0});
    perfect.connectivity.scores["d1"] = 1.0;
    CHECK(connectivity_penalty(perfect, j, params) == doctest::Approx(1.0).epsilon(1e-12));

    AgentState none = make_agent("a1", {4, 16, 250, 0});
    CHECK(connectivity_penalty(none, j, params) == doctest::Approx(2.0).epsilon(1e-12));

    AgentState half = make_agent("a2", {4, 16, 250, 0});
    half.connectivity.scores["d1"] = 0.5;
    CHECK(connectivity_penalty(half, j, params) == doctest::Approx(1.5).epsilon(1e-12));

    Job no_data = make_job("j1", {1, 1, 1, 0});
    CHECK(connectivity_penalty(none, no_data, params) == 1.0);
}

TEST_CASE("connectivity penalty stays within [1, 1+beta]") {
    Rng rng(11);
    CostParams params;
    params.beta = 2.5;
    for (int i = 0; i < 200; ++i) {
        AgentState a = make_agent("a", {4, 16, 250, 0});
        Job j = make_job("j", {1, 1, 1, 0});
        int dtns = static_cast<int>(rng.uniform_int(0, 4));
        for (int d = 0; d < dtns; ++d) {
            std::string name = "d" + std::to_string(d);
            j.data_in.push_back({name, "f"});
            if (rng.uniform01() < 0.7) a.connectivity.scores[name] = rng.uniform(0, 1);
        }
        double p = connectivity_penalty(a, j, params);
        CHECK(p >= 1.0);
        CHECK(p <= 1.0 + params.beta);
        if (j.data_in.empty()) CHECK(p == 1.0);
    }
}

TEST_CASE("long-job penalty boundary at tau") {
    CostParams params;  // tau = 20, alpha = 1/20 = 0.05
    CHECK(params.alpha() == doctest::Approx(0.05).epsilon(1e-12));

    CHECK(long_job_penalty(make_job("j", {1, 1, 1, 0}, 20.0), params) == 0.0);
    CHECK(long_job_penalty(make_job("j", {1, 1, 1, 0}, 5.0), params) == 0.0);
    // alpha * (40 - 20) = 0.05 * 20 = 1.0
    CHECK(long_job_penalty(make_job("j", {1, 1, 1, 0}, 40.0), params) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cost: hand-evaluated utilization example") {
    // job (2,8,0,0), walltime 10s, no data deps; agent (8,32,500,0);
    // cpu/ram weights 0.5 each. Utilization = 0.5*(2/8) + 0.5*(8/32) = 0.25;
    // empty DTN set contributes nothing, walltime below tau contributes 0.
    CostParams params;
    params.lightweight_weights = {0.5, 0.5, 0.0, 0.0};
    AgentState a = make_agent("a0", {8, 32, 500, 0});
    Job j = make_job("j0", {2, 8, 0, 0}, 10.0);
    CHECK(cost(a, j, params) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cost is deterministic and favors better connectivity") {
    CostParams params;
    Job j = make_job("j0", {1, 4, 10, 0}, 10.0);
    j.data_in = {{"d1", "f"}};

    AgentState strong = make_agent("a0", {4, 16, 250, 0});
    strong.connectivity.scores["d1"] = 0.9;
    AgentState weak = make_agent("a1", {4, 16, 250, 0});
    weak.connectivity.scores["d1"] = 0.3;

    CHECK(cost(strong, j, params) == cost(strong, j, params));
    CHECK(cost(strong, j, params) < cost(weak, j, params));
}

TEST_CASE("cost contract: zero availability with positive requirement throws") {
    CostParams params;
    AgentState a = make_agent("a0", {0, 16, 250, 0});
    Job j = make_job("j0", {1, 1, 1, 0});
    CHECK_THROWS_AS(cost(a, j, params), std::domain_error);

    // 0/0 on the gpu dimension is defined as zero utilization
    AgentState nogpu = make_agent("a1", {4, 16, 250, 0});
    Job nogpu_job = make_job("j1", {1, 1, 1, 0});
    CHECK_NOTHROW(cost(nogpu, nogpu_job, params));
}

TEST_CASE("cost is monotone in each requirement dimension") {
    Rng rng(23);
    CostParams params;
    AgentState a = make_agent("a0", {8, 32, 500, 4});
    a.connectivity.scores["d1"] = 0.8;
    for (int i = 0; i < 300; ++i) {
        Job j = make_job("j", {rng.uniform(0.1, 4), rng.uniform(0.1, 16),
                               rng.uniform(0.1, 250), static_cast<int>(rng.uniform_int(0, 2))},
                         rng.uniform(1, 100));
        Job bigger = j;
        int dim = static_cast<int>(rng.uniform_int(0, 3));
        switch (dim) {
            case 0: bigger.requirements.cpu += rng.uniform(0, 4); break;
            case 1: bigger.requirements.ram_gb += rng.uniform(0, 16); break;
            case 2: bigger.requirements.disk_gb += rng.uniform(0, 250); break;
            case 3: bigger.requirements.gpu += 1; break;
        }
        CHECK(cost(a, bigger, params) >= cost(a, j, params));
    }
}

TEST_CASE("uniform scaling of requirements and availability preserves the argmin") {
    Rng rng(31);
    CostParams params;
    for (int round = 0; round < 100; ++round) {
        std::vector<AgentState> agents;
        for (int k = 0; k < 5; ++k) {
            agents.push_back(make_agent("a" + std::to_string(k),
                                        {rng.uniform(1, 8), rng.uniform(4, 32),
                                         rng.uniform(50, 500), 1}));
            agents.back().connectivity.scores["d1"] = rng.uniform(0.3, 1.0);
        }
        Job j = make_job("j", {rng.uniform(0.1, 1), rng.uniform(0.1, 4),
                               rng.uniform(0.1, 50), 0},
                         rng.uniform(5, 300));
        j.data_in = {{"d1", "f"}};

        const double scale = rng.uniform(1.5, 10.0);
        auto argmin = [&](double s) {
            int best = -1;
            double best_cost = 0;
            for (std::size_t k = 0; k < agents.size(); ++k) {
                AgentState scaled = agents[k];
                scaled.available.cpu *= s;
                scaled.available.ram_gb *= s;
                scaled.available.disk_gb *= s;
                Job sj = j;
                sj.requirements.cpu *= s;
                sj.requirements.ram_gb *= s;
                sj.requirements.disk_gb *= s;
                double c = cost(scaled, sj, params);
                if (best < 0 || c < best_cost) {
                    best = static_cast<int>(k);
                    best_cost = c;
                }
            }
            return best;
        };
        CHECK(argmin(1.0) == argmin(scale));
    }
}

TEST_CASE("candidate threshold membership") {
    CostParams params;  // theta = 0.10
    CostMatrix m;
    m.rows = {"a0", "a1"};
    m.cols = {"j0"};
    m.resize();

    SUBCASE("within threshold") {
        m.set(0, 0, 1.05);
        m.set(1, 0, 1.0);
        auto res = select_candidates(m, "a0", params, 8);
        REQUIRE(res.selected.size() == 1);
        CHECK(res.selected[0].job == "j0");
        CHECK(res.selected[0].cost == 1.05);
    }

    SUBCASE("outside threshold") {
        m.set(0, 0, 1.2);
        m.set(1, 0, 1.0);
        auto res = select_candidates(m, "a0", params, 8);
        CHECK(res.selected.empty());
    }

    SUBCASE("all-infinite column marks the job infeasible") {
        auto res = select_candidates(m, "a0", params, 8);
        CHECK(res.selected.empty());
        REQUIRE(res.infeasible_jobs.size() == 1);
        CHECK(res.infeasible_jobs[0] == "j0");
    }
}

TEST_CASE("the argmin agent always qualifies as a candidate") {
    Rng rng(47);
    CostParams params;
    for (int round = 0; round < 200; ++round) {
        CostMatrix m;
        int agents = static_cast<int>(rng.uniform_int(2, 8));
        int jobs = static_cast<int>(rng.uniform_int(1, 6));
        for (int a = 0; a < agents; ++a) m.rows.push_back("a" + std::to_string(a));
        for (int j = 0; j < jobs; ++j) m.cols.push_back("j" + std::to_string(j));
        m.resize();
        for (int a = 0; a < agents; ++a) {
            for (int j = 0; j < jobs; ++j) {
                if (rng.uniform01() < 0.3) continue;  // leave infeasible
                m.set(a, j, rng.uniform(0.1, 5.0));
            }
        }
        for (int j = 0; j < jobs; ++j) {
            double best = kInfeasibleCost;
            int best_row = -1;
            for (int a = 0; a < agents; ++a) {
                if (m.at(a, j) < best) {
                    best = m.at(a, j);
                    best_row = a;
                }
            }
            if (best_row < 0) continue;
            auto res = select_candidates(m, m.rows[static_cast<std::size_t>(best_row)],
                                         params, jobs);
            bool found = false;
            for (const auto& c : res.selected) {
                if (c.job == m.cols[static_cast<std::size_t>(j)]) found = true;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("batch cap keeps the cheapest candidates") {
    CostParams params;
    CostMatrix m;
    m.rows = {"a0"};
    for (int j = 0; j < 12; ++j) m.cols.push_back("j" + std::to_string(j));
    m.resize();
    for (int j = 0; j < 12; ++j) m.set(0, static_cast<std::size_t>(j), 1.0 + j);
    auto res = select_candidates(m, "a0", params, 8);
    REQUIRE(res.selected.size() == 8);
    CHECK(res.selected.front().cost == 1.0);
    CHECK(res.selected.back().cost == 8.0);
}

TEST_CASE("cost cache: hits, version misses, ttl and eviction") {
    CostCache cache(3, from_seconds(60));
    int computed = 0;
    auto compute = [&]() {
        ++computed;
        return 1.5;
    };

    CacheKey k{"a0", "j0", 1, 1};
    CHECK(cache.get_or_compute(k, 0, compute) == 1.5);
    CHECK(computed == 1);
    CHECK(cache.get_or_compute(k, from_seconds(1), compute) == 1.5);
    CHECK(computed == 1);  // hit, no recomputation
    CHECK(cache.hits() == 1);

    // version bump changes the key
    CacheKey bumped{"a0", "j0", 2, 1};
    cache.get_or_compute(bumped, from_seconds(1), compute);
    CHECK(computed == 2);

    // ttl expiry: age 61s > 60s
    cache.get_or_compute(k, from_seconds(61), compute);
    CHECK(computed == 3);

    // LRU eviction at capacity 3
    cache.get_or_compute(CacheKey{"a1", "j1", 1, 1}, from_seconds(61), compute);
    cache.get_or_compute(CacheKey{"a2", "j2", 1, 1}, from_seconds(61), compute);
    cache.get_or_compute(CacheKey{"a3", "j3", 1, 1}, from_seconds(61), compute);
    CHECK(cache.size() == 3);
}

TEST_CASE("cached and uncached cost agree bit-for-bit") {
    Rng rng(53);
    CostParams params;
    CostCache cache(1024, from_seconds(60));
    for (int i = 0; i < 300; ++i) {
        AgentState a = make_agent("a" + std::to_string(i % 7),
                                  {rng.uniform(1, 8), rng.uniform(4, 32),
                                   rng.uniform(50, 500), static_cast<int>(rng.uniform_int(0, 4))});
        a.version = static_cast<std::uint64_t>(i % 5);
        if (rng.uniform01() < 0.5) a.connectivity.scores["d1"] = rng.uniform(0, 1);
        Job j = make_job("j" + std::to_string(i % 11),
                         {rng.uniform(0.1, 1), rng.uniform(0.1, 4), rng.uniform(0.1, 50), 0},
                         rng.uniform(1, 400));
        j.version = static_cast<std::uint64_t>(i % 3);
        if (rng.uniform01() < 0.5) j.data_in = {{"d1", "f"}};

        double direct = cost(a, j, params);
        CacheKey key{a.id, j.id, a.version, j.version};
        double via_cache = cache.get_or_compute(key, from_seconds(i), [&]() {
            return cost(a, j, params);
        });
        // bit-for-bit equality, not approximate
        CHECK(std::memcmp(&direct, &via_cache, sizeof(double)) == 0);
    }
}

TEST_CASE("weight sets validate and shift toward disk for data jobs") {
    CostParams params;
    CHECK_NOTHROW(params.validate());

    Job data_job = make_job("j", {1, 1, 1, 0});
    data_job.data_in = {{"d1", "f"}};
    Weights w = params.weights_for(data_job);
    CHECK(w.cpu == doctest::Approx(0.3));
    CHECK(w.disk == doctest::Approx(0.3));
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));

    params.standard_weights = {0.5, 0.5, 0.1, 0.0};  // sums to 1.1
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
