#include <doctest.h>

#include "accord/core/agent_state.hpp"
#include "accord/core/job.hpp"
#include "accord/core/rng.hpp"

using namespace accord;

TEST_CASE("fits is component-wise on all four dimensions") {
    // boundary equality counts as fitting
    CHECK(fits({2, 8, 100, 0}, {2, 8, 100, 0}));
    // gpu dimension alone can reject
    CHECK_FALSE(fits({0, 0, 0, 1}, {8, 32, 500, 0}));
    // strictly dominated requirement
    CHECK(fits({2, 8, 100, 0}, {4, 16, 250, 0}));
    CHECK_FALSE(fits({4.1, 8, 100, 0}, {4, 16, 250, 0}));
}

TEST_CASE("fits is monotone in the available vector") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        ResourceVector req{rng.uniform(0, 8), rng.uniform(0, 32), rng.uniform(0, 500),
                           static_cast<int>(rng.uniform_int(0, 4))};
        ResourceVector avail{rng.uniform(0, 8), rng.uniform(0, 32), rng.uniform(0, 500),
                             static_cast<int>(rng.uniform_int(0, 4))};
        ResourceVector bigger = avail;
        bigger.cpu += rng.uniform(0, 2);
        bigger.ram_gb += rng.uniform(0, 2);
        bigger.disk_gb += rng.uniform(0, 50);
        bigger.gpu += static_cast<int>(rng.uniform_int(0, 2));
        if (fits(req, avail)) CHECK(fits(req, bigger));
    }
}

TEST_CASE("required_dtns unions input and output endpoints") {
    Job job;
    job.data_in = {{"d1", "f1"}};
    job.data_out = {{"d1", "f2"}, {"d2", "f3"}};
    CHECK(required_dtns(job) == std::set<DtnId>{"d1", "d2"});

    Job empty;
    CHECK(required_dtns(empty).empty());

    Job dup;
    dup.data_in = {{"d3", "f1"}, {"d3", "f2"}};
    CHECK(required_dtns(dup) == std::set<DtnId>{"d3"});
}

TEST_CASE("job lifecycle graph rejects illegal edges") {
    Job job;
    job.id = "j1";
    CHECK(job.state == JobState::Pending);

    SUBCASE("happy path walks the full chain") {
        CHECK(job.try_transition(JobState::Proposed));
        CHECK(job.try_transition(JobState::Prepared));
        CHECK(job.try_transition(JobState::Committed));
        CHECK(job.try_transition(JobState::Running));
        CHECK(job.try_transition(JobState::Complete));
        // terminal: nothing leaves Complete
        CHECK_FALSE(job.try_transition(JobState::Pending));
        CHECK_FALSE(job.try_transition(JobState::Running));
    }

    SUBCASE("pending cannot jump to running") {
        CHECK_FALSE(job.try_transition(JobState::Running));
        CHECK(job.state == JobState::Pending);
    }

    SUBCASE("in-flight states reset to pending on failure") {
        CHECK(job.try_transition(JobState::Proposed));
        CHECK(job.try_transition(JobState::Pending));
        CHECK(job.try_transition(JobState::Proposed));
        CHECK(job.try_transition(JobState::Prepared));
        CHECK(job.try_transition(JobState::Pending));
    }

    SUBCASE("delegation only out of committed") {
        CHECK_FALSE(job.try_transition(JobState::Delegated));
        job.try_transition(JobState::Proposed);
        job.try_transition(JobState::Prepared);
        job.try_transition(JobState::Committed);
        CHECK(job.try_transition(JobState::Delegated));
        CHECK(job.try_transition(JobState::Pending));
    }

    SUBCASE("infeasible is terminal and only reachable from pending") {
        CHECK(job.try_transition(JobState::Infeasible));
        CHECK_FALSE(job.try_transition(JobState::Pending));
    }
}

TEST_CASE("version strictly increases over random mutation sequences") {
    Rng rng(42);
    for (int run = 0; run < 50; ++run) {
        Job job;
        job.id = "j";
        std::uint64_t last = job.version;
        for (int step = 0; step < 100; ++step) {
            int op = static_cast<int>(rng.uniform_int(0, 3));
            bool mutated = false;
            switch (op) {
                case 0: {
                    JobState target = static_cast<JobState>(rng.uniform_int(0, 8));
                    mutated = job.try_transition(target);
                    break;
                }
                case 1:
                    job.add_exclusion("g" + std::to_string(rng.uniform_int(0, 3)));
                    mutated = job.version != last;
                    break;
                case 2:
                    job.touch();
                    mutated = true;
                    break;
                case 3:
                    mutated = job.set_submit_time(static_cast<SimTime>(rng.uniform_int(0, 1000)));
                    break;
            }
            if (mutated) {
                CHECK(job.version > last);
                last = job.version;
            } else {
                CHECK(job.version == last);
            }
        }
    }
}

TEST_CASE("timestamps stay ordered submit <= selection_start <= selection_end") {
    Job job;
    CHECK(job.set_submit_time(100));
    CHECK_FALSE(job.set_selection_start(50));
    CHECK(job.set_selection_start(150));
    CHECK_FALSE(job.set_selection_end(120));
    CHECK(job.set_selection_end(250));
    CHECK_FALSE(job.set_submit_time(200));  // would pass selection_start
}

TEST_CASE("agent state resource accounting") {
    AgentState a;
    a.id = "a000";
    a.capacity = {4, 16, 250, 1};
    a.available = a.capacity;
    std::uint64_t v0 = a.version;

    CHECK(a.try_consume({2, 8, 100, 1}));
    CHECK(a.available == ResourceVector{2, 8, 150, 0});
    CHECK(a.version > v0);

    // over-consume is rejected without mutation
    CHECK_FALSE(a.try_consume({3, 1, 1, 0}));
    CHECK(a.available == ResourceVector{2, 8, 150, 0});

    a.release({2, 8, 100, 1});
    CHECK(a.available == a.capacity);

    // release clamps at capacity
    a.release({1, 1, 1, 1});
    CHECK(a.available == a.capacity);
}
