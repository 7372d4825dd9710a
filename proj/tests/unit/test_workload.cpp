#include <doctest.h>

#include <algorithm>
#include <map>

#include "accord/selection/cost_model.hpp"
#include "accord/topology/topology.hpp"
#include "accord/workload/generator.hpp"

using namespace accord;
using namespace accord::workload;

namespace {

std::vector<AgentState> make_population(int n, std::uint64_t seed,
                                        const std::vector<SiteId>& sites = {"site0"}) {
    topology::TopologySpec spec;
    spec.kind = topology::TopologyKind::Mesh;
    spec.total_agents = n;
    auto topo = topology::build_topology(spec);
    for (std::size_t i = 0; i < topo.agents.size(); ++i) {
        topo.agents[i].site = sites[i % sites.size()];
    }
    AgentProfileSpec profiles;
    assign_profiles(topo.agents, profiles, seed);
    return std::move(topo.agents);
}

}  // namespace

TEST_CASE("profile proportions land within one agent of the exact split") {
    auto agents = make_population(30, 1);
    std::map<AgentProfile, int> counts;
    for (const auto& a : agents) ++counts[a.profile];
    CHECK(counts[AgentProfile::Small] == 12);        // 30 * 0.40
    CHECK(counts[AgentProfile::Medium] >= 7);        // 30 * 0.25 = 7.5
    CHECK(counts[AgentProfile::Medium] <= 8);
    CHECK(counts[AgentProfile::Large] >= 10);        // 30 * 0.35 = 10.5
    CHECK(counts[AgentProfile::Large] <= 11);

    // capacities follow the class table
    for (const auto& a : agents) {
        switch (a.profile) {
            case AgentProfile::Small: CHECK(a.capacity == ResourceVector{2, 8, 100, 0}); break;
            case AgentProfile::Medium: CHECK(a.capacity == ResourceVector{4, 16, 250, 0}); break;
            case AgentProfile::Large: CHECK(a.capacity == ResourceVector{8, 32, 500, 4}); break;
        }
        CHECK(a.available == a.capacity);
    }
}

TEST_CASE("profiles spread proportionally across sites") {
    auto agents = make_population(30, 2, {"s0", "s1", "s2"});
    std::map<SiteId, std::map<AgentProfile, int>> by_site;
    for (const auto& a : agents) ++by_site[a.site][a.profile];
    for (const auto& [site, counts] : by_site) {
        // 10 agents per site: 4 small, 2-3 medium, 3-4 large
        auto get = [&](AgentProfile p) {
            auto it = counts.find(p);
            return it == counts.end() ? 0 : it->second;
        };
        CHECK(get(AgentProfile::Small) >= 3);
        CHECK(get(AgentProfile::Small) <= 5);
        CHECK(get(AgentProfile::Large) >= 3);
        CHECK(get(AgentProfile::Large) <= 5);
    }
}

TEST_CASE("agent DTN draws stay inside the configured ranges") {
    auto agents = make_population(50, 3);
    for (const auto& a : agents) {
        CHECK(a.connectivity.scores.size() <= 4);
        for (const auto& [d, s] : a.connectivity.scores) {
            CHECK(s >= 0.6);
            CHECK(s <= 0.95);
        }
    }
}

TEST_CASE("same seed reproduces the identical population and workload") {
    auto a1 = make_population(20, 7);
    auto a2 = make_population(20, 7);
    REQUIRE(a1.size() == a2.size());
    for (std::size_t i = 0; i < a1.size(); ++i) {
        CHECK(a1[i].profile == a2[i].profile);
        CHECK(a1[i].connectivity == a2[i].connectivity);
    }

    WorkloadSpec wspec;
    wspec.job_count = 200;
    auto j1 = generate_jobs(wspec, a1, 7);
    auto j2 = generate_jobs(wspec, a2, 7);
    REQUIRE(j1.size() == j2.size());
    for (std::size_t i = 0; i < j1.size(); ++i) {
        CHECK(j1[i].job.requirements == j2[i].job.requirements);
        CHECK(j1[i].job.walltime_s == j2[i].job.walltime_s);
        CHECK(j1[i].originator == j2[i].originator);
        CHECK(j1[i].submit_at == j2[i].submit_at);
    }
}

TEST_CASE("every generated job is feasible on its originating agent") {
    auto agents = make_population(30, 11);
    WorkloadSpec wspec;
    wspec.job_count = 1000;
    auto jobs = generate_jobs(wspec, agents, 11);
    REQUIRE(jobs.size() == 1000);

    std::map<AgentId, const AgentState*> by_id;
    for (const auto& a : agents) by_id[a.id] = &a;
    selection::CostParams params;
    params.strict_connectivity = true;
    for (const auto& g : jobs) {
        const AgentState* origin = by_id.at(g.originator);
        CHECK(fits(g.job.requirements, origin->capacity));
        // inherited data dependencies are always covered by the originator
        CHECK(origin->connectivity.covers(required_dtns(g.job)));
    }
}

TEST_CASE("class mix respects the configured bounds") {
    auto agents = make_population(30, 13);
    WorkloadSpec wspec;
    wspec.job_count = 1000;
    auto jobs = generate_jobs(wspec, agents, 13);
    std::map<JobClass, int> counts;
    for (const auto& g : jobs) ++counts[g.job.job_class];
    CHECK(counts[JobClass::Lightweight] >= 550);
    CHECK(counts[JobClass::Lightweight] <= 600);
    CHECK(counts[JobClass::Standard] >= 250);
    CHECK(counts[JobClass::Standard] <= 300);
    CHECK(counts[JobClass::ResourceIntensive] >= 100);
    CHECK(counts[JobClass::ResourceIntensive] <= 150);
}

TEST_CASE("walltime mean lands within 15% of the target for 1000+ jobs") {
    auto agents = make_population(30, 17);
    WorkloadSpec wspec;
    wspec.job_count = 2000;
    auto jobs = generate_jobs(wspec, agents, 17);
    double sum = 0, lo = 1e18, hi = 0;
    for (const auto& g : jobs) {
        sum += g.job.walltime_s;
        lo = std::min(lo, g.job.walltime_s);
        hi = std::max(hi, g.job.walltime_s);
    }
    double mean = sum / static_cast<double>(jobs.size());
    CHECK(mean >= 180.0 * 0.85);
    CHECK(mean <= 180.0 * 1.15);
    CHECK(lo >= 6.0);
    CHECK(hi <= 1800.0);
}

TEST_CASE("size bias: median requirement fraction near u^3 median of 0.125") {
    auto agents = make_population(30, 19);
    WorkloadSpec wspec;
    wspec.job_count = 3000;
    auto jobs = generate_jobs(wspec, agents, 19);
    // Lightweight cpu spans [0.1, 1.0] on every profile, so the sampled
    // fraction of the range is directly observable there.
    std::vector<double> fractions;
    for (const auto& g : jobs) {
        if (g.job.job_class != JobClass::Lightweight) continue;
        fractions.push_back((g.job.requirements.cpu - 0.1) / (1.0 - 0.1));
    }
    REQUIRE(fractions.size() > 500);
    std::sort(fractions.begin(), fractions.end());
    double median = fractions[fractions.size() / 2];
    CHECK(median >= 0.125 - 0.03);
    CHECK(median <= 0.125 + 0.03);
}

TEST_CASE("GPU demand only in resource-intensive and occasional standard jobs") {
    auto agents = make_population(30, 23);
    WorkloadSpec wspec;
    wspec.job_count = 1000;
    auto jobs = generate_jobs(wspec, agents, 23);
    int std_total = 0, std_gpu = 0;
    for (const auto& g : jobs) {
        switch (g.job.job_class) {
            case JobClass::Lightweight: CHECK(g.job.requirements.gpu == 0); break;
            case JobClass::Standard:
                ++std_total;
                CHECK(g.job.requirements.gpu <= 1);
                if (g.job.requirements.gpu == 1) ++std_gpu;
                break;
            case JobClass::ResourceIntensive: CHECK(g.job.requirements.gpu == 4); break;
        }
    }
    // about 10% of standard jobs ask for one GPU
    double frac = static_cast<double>(std_gpu) / std_total;
    CHECK(frac > 0.03);
    CHECK(frac < 0.20);
}

TEST_CASE("no generated job requires a DTN absent from every agent") {
    auto agents = make_population(30, 29);
    WorkloadSpec wspec;
    wspec.job_count = 500;
    auto jobs = generate_jobs(wspec, agents, 29);
    std::set<DtnId> reachable;
    for (const auto& a : agents) {
        for (const auto& [d, s] : a.connectivity.scores) reachable.insert(d);
    }
    for (const auto& g : jobs) {
        for (const auto& d : required_dtns(g.job)) CHECK(reachable.count(d) == 1);
    }
}

TEST_CASE("submission times follow the configured rate") {
    auto agents = make_population(10, 31);
    WorkloadSpec wspec;
    wspec.job_count = 1000;
    wspec.submission_rate_per_s = 20.0;
    auto jobs = generate_jobs(wspec, agents, 31);
    // last submission around job_count / rate = 50s, with Poisson spread
    double last = to_seconds(jobs.back().submit_at);
    CHECK(last > 30.0);
    CHECK(last < 80.0);
    for (std::size_t i = 1; i < jobs.size(); ++i) {
        CHECK(jobs[i].submit_at >= jobs[i - 1].submit_at);
    }
}

TEST_CASE("joining agents draw valid deterministic profiles") {
    AgentProfileSpec spec;
    auto a1 = make_joining_agent("j001", "g0", "site0", spec, 42, 1);
    auto a2 = make_joining_agent("j001", "g0", "site0", spec, 42, 1);
    CHECK(a1.profile == a2.profile);
    CHECK(a1.connectivity == a2.connectivity);
    CHECK(a1.capacity == a1.available);
    CHECK(a1.group_id == "g0");
}

TEST_CASE("spec validation rejects inconsistent mixes") {
    WorkloadSpec w;
    w.lightweight_fraction = 0.5;  // sums to 0.925
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);

    AgentProfileSpec p;
    p.small_fraction = 0.5;  // sums to 1.1
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
