#include "accord/workload/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "accord/core/rng.hpp"

namespace accord::workload {

namespace {

constexpr double kReqFloor = 0.1;  // sampling floor per dimension

struct ClassEnvelope {
    double cpu_lo, cpu_hi;
    double ram_lo, ram_hi;
    double disk_lo, disk_hi;
    int gpu;
};

ClassEnvelope envelope_for(JobClass c, bool standard_gpu) {
    switch (c) {
        case JobClass::Lightweight:
            return {kReqFloor, 1.0, kReqFloor, 4.0, kReqFloor, 20.0, 0};
        case JobClass::Standard:
            return {1.0, 2.0, 4.0, 8.0, kReqFloor, 50.0, standard_gpu ? 1 : 0};
        case JobClass::ResourceIntensive:
            return {2.0, 4.0, 8.0, 16.0, kReqFloor, 100.0, 4};
    }
    return {kReqFloor, 1.0, kReqFloor, 4.0, kReqFloor, 20.0, 0};
}

// Largest-remainder apportionment; counts stay within +-1 of exact shares.
std::vector<int> apportion(const std::vector<double>& fractions, int total) {
    std::vector<int> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> rema;
    int assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        double exact = fractions[i] * total;
        counts[i] = static_cast<int>(exact);
        assigned += counts[i];
        rema.emplace_back(exact - counts[i], i);
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; assigned < total; ++k, ++assigned) {
        counts[rema[static_cast<std::size_t>(k) % rema.size()].second] += 1;
    }
    return counts;
}

DtnId dtn_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%02d", i);
    return buf;
}

ResourceVector capacity_for(AgentProfile p, const AgentProfileSpec& spec) {
    switch (p) {
        case AgentProfile::Small: return spec.small_capacity;
        case AgentProfile::Medium: return spec.medium_capacity;
        case AgentProfile::Large: return spec.large_capacity;
    }
    return spec.small_capacity;
}

void draw_connectivity(AgentState& a, const AgentProfileSpec& spec, Rng& rng) {
    int n = static_cast<int>(rng.uniform_int(spec.dtn_count_min, spec.dtn_count_max));
    std::vector<int> pool(static_cast<std::size_t>(spec.dtn_pool_size));
    for (int i = 0; i < spec.dtn_pool_size; ++i) pool[static_cast<std::size_t>(i)] = i;
    rng.shuffle(pool);
    for (int i = 0; i < n; ++i) {
        a.connectivity.scores[dtn_name(pool[static_cast<std::size_t>(i)])] =
            rng.uniform(spec.dtn_score_min, spec.dtn_score_max);
    }
}

}  // namespace

void AgentProfileSpec::validate() const {
    if (std::fabs(small_fraction + medium_fraction + large_fraction - 1.0) > 1e-9) {
        throw std::invalid_argument("agent class proportions must sum to 1.0");
    }
    if (dtn_count_min < 0 || dtn_count_max < dtn_count_min ||
        dtn_count_max > dtn_pool_size) {
        throw std::invalid_argument("dtn count range invalid");
    }
    if (dtn_score_min < 0 || dtn_score_max > 1.0 || dtn_score_max < dtn_score_min) {
        throw std::invalid_argument("dtn score range must sit inside [0,1]");
    }
}

void WorkloadSpec::validate() const {
    if (job_count <= 0) throw std::invalid_argument("job_count must be positive");
    double sum = lightweight_fraction + standard_fraction + resource_intensive_fraction;
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("job class mix must sum to 1.0");
    }
    if (walltime_min_s <= 0 || walltime_max_s <= walltime_min_s) {
        throw std::invalid_argument("walltime range invalid");
    }
    if (walltime_mean_s <= walltime_min_s ||
        walltime_mean_s >= 0.5 * (walltime_min_s + walltime_max_s)) {
        throw std::invalid_argument("walltime mean outside the attainable range");
    }
    if (submission_rate_per_s <= 0) {
        throw std::invalid_argument("submission_rate must be positive");
    }
}

double truncated_exp_rate(double lo, double hi, double mean) {
    const double d = hi - lo;
    auto mean_at = [&](double lam) {
        return lo + 1.0 / lam - d * std::exp(-lam * d) / (1.0 - std::exp(-lam * d));
    };
    double a = 1e-9, b = 10.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (a + b);
        if (mean_at(mid) > mean) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

void assign_profiles(std::vector<AgentState>& agents, const AgentProfileSpec& spec,
                     std::uint64_t seed) {
    spec.validate();
    Rng rng(seed ^ 0x70726f66696c6521ULL);

    std::vector<AgentState*> leaves;
    for (auto& a : agents) {
        if (a.level == 0) leaves.push_back(&a);
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const AgentState* a, const AgentState* b) { return a->id < b->id; });

    auto counts = apportion({spec.small_fraction, spec.medium_fraction, spec.large_fraction},
                            static_cast<int>(leaves.size()));

    // Deal each class across sites round-robin so profiles stay
    // proportionally distributed per site.
    std::map<SiteId, std::vector<AgentState*>> by_site;
    for (auto* a : leaves) by_site[a->site].push_back(a);
    std::vector<SiteId> sites;
    for (auto& [s, v] : by_site) sites.push_back(s);

    const AgentProfile classes[3] = {AgentProfile::Small, AgentProfile::Medium,
                                     AgentProfile::Large};
    std::size_t site_cursor = 0;
    for (int ci = 0; ci < 3; ++ci) {
        int remaining = counts[static_cast<std::size_t>(ci)];
        while (remaining > 0) {
            bool placed = false;
            for (std::size_t probe = 0; probe < sites.size(); ++probe) {
                auto& pool = by_site[sites[(site_cursor + probe) % sites.size()]];
                if (pool.empty()) continue;
                AgentState* a = pool.front();
                pool.erase(pool.begin());
                a->profile = classes[ci];
                site_cursor = (site_cursor + probe + 1) % sites.size();
                placed = true;
                break;
            }
            if (!placed) throw std::logic_error("profile assignment ran out of agents");
            --remaining;
        }
    }

    for (auto* a : leaves) {
        a->capacity = capacity_for(a->profile, spec);
        a->available = a->capacity;
        draw_connectivity(*a, spec, rng);
        a->touch();
    }
}

AgentState make_joining_agent(const AgentId& id, const GroupId& group, const SiteId& site,
                              const AgentProfileSpec& spec, std::uint64_t seed, int index) {
    // 20-slot pattern at the configured 40/25/35 proportions.
    static const AgentProfile pattern[20] = {
        AgentProfile::Small,  AgentProfile::Medium, AgentProfile::Large,
        AgentProfile::Small,  AgentProfile::Large,  AgentProfile::Medium,
        AgentProfile::Small,  AgentProfile::Large,  AgentProfile::Small,
        AgentProfile::Medium, AgentProfile::Large,  AgentProfile::Small,
        AgentProfile::Large,  AgentProfile::Small,  AgentProfile::Medium,
        AgentProfile::Large,  AgentProfile::Small,  AgentProfile::Large,
        AgentProfile::Small,  AgentProfile::Medium};
    AgentState a;
    a.id = id;
    a.level = 0;
    a.group_id = group;
    a.site = site;
    a.profile = pattern[static_cast<std::size_t>(index) % 20];
    a.capacity = capacity_for(a.profile, spec);
    a.available = a.capacity;
    Rng rng(seed ^ fnv1a_str(id) ^ 0x6a6f696e21ULL);
    draw_connectivity(a, spec, rng);
    a.touch();
    return a;
}

std::vector<GeneratedJob> generate_jobs(const WorkloadSpec& spec,
                                        const std::vector<AgentState>& population,
                                        std::uint64_t seed) {
    spec.validate();
    if (population.empty()) throw std::invalid_argument("population must be nonempty");
    Rng rng(seed ^ 0x776f726b6c6f6164ULL);

    std::vector<const AgentState*> leaves;
    for (const auto& a : population) {
        if (a.level == 0) leaves.push_back(&a);
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const AgentState* a, const AgentState* b) { return a->id < b->id; });
    if (leaves.empty()) throw std::invalid_argument("population has no leaf agents");

    auto class_counts = apportion(
        {spec.lightweight_fraction, spec.standard_fraction, spec.resource_intensive_fraction},
        spec.job_count);
    std::vector<JobClass> classes;
    classes.insert(classes.end(), static_cast<std::size_t>(class_counts[0]), JobClass::Lightweight);
    classes.insert(classes.end(), static_cast<std::size_t>(class_counts[1]), JobClass::Standard);
    classes.insert(classes.end(), static_cast<std::size_t>(class_counts[2]),
                   JobClass::ResourceIntensive);
    rng.shuffle(classes);

    const double lambda =
        truncated_exp_rate(spec.walltime_min_s, spec.walltime_max_s, spec.walltime_mean_s);

    std::vector<GeneratedJob> out;
    out.reserve(static_cast<std::size_t>(spec.job_count));
    SimTime submit = 0;
    for (int i = 0; i < spec.job_count; ++i) {
        JobClass cls = classes[static_cast<std::size_t>(i)];
        bool wants_gpu = cls == JobClass::ResourceIntensive ||
                         (cls == JobClass::Standard &&
                          rng.uniform01() < spec.gpu_standard_fraction);
        ClassEnvelope env = envelope_for(cls, wants_gpu && cls == JobClass::Standard);

        // Originator must be able to host the class envelope's minima.
        std::vector<const AgentState*> eligible;
        for (const auto* a : leaves) {
            if (a->capacity.cpu >= env.cpu_lo && a->capacity.ram_gb >= env.ram_lo &&
                a->capacity.disk_gb >= env.disk_lo && a->capacity.gpu >= env.gpu) {
                eligible.push_back(a);
            }
        }
        if (eligible.empty()) {
            throw std::runtime_error("no agent can originate a " +
                                     std::string(to_string(cls)) + " job");
        }
        const AgentState& origin =
            *eligible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))];

        auto biased = [&](double lo, double hi, double cap) {
            double top = std::min(hi, cap);
            if (top < lo) top = lo;
            double u = rng.uniform01();
            double bias = std::pow(u, static_cast<double>(spec.size_bias_exponent));
            return lo + bias * (top - lo);
        };

        GeneratedJob gen;
        Job& job = gen.job;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "j%05d", i);
        job.id = buf;
        job.job_class = cls;
        job.requirements.cpu = biased(env.cpu_lo, env.cpu_hi, origin.capacity.cpu);
        job.requirements.ram_gb = biased(env.ram_lo, env.ram_hi, origin.capacity.ram_gb);
        job.requirements.disk_gb = biased(env.disk_lo, env.disk_hi, origin.capacity.disk_gb);
        job.requirements.gpu = env.gpu;

        double w = spec.walltime_min_s + rng.exponential(1.0 / lambda);
        while (w > spec.walltime_max_s) {
            w = spec.walltime_min_s + rng.exponential(1.0 / lambda);
        }
        job.walltime_s = w;

        int di = 0;
        for (const auto& [dtn, score] : origin.connectivity.scores) {
            (void)score;
            if (rng.uniform01() < 0.5) {
                job.data_in.push_back(DataRef{dtn, job.id + "-in" + std::to_string(di++)});
                if (rng.uniform01() < 0.3) {
                    job.data_out.push_back(DataRef{dtn, job.id + "-out" + std::to_string(di++)});
                }
            }
        }

        submit += from_seconds(rng.exponential(1.0 / spec.submission_rate_per_s));
        gen.submit_at = submit;
        gen.originator = origin.id;

        if (!fits(job.requirements, origin.capacity)) {
            throw std::logic_error("generated job exceeds its originator's capacity");
        }
        out.push_back(std::move(gen));
    }
    return out;
}

AgentProfileSpec AgentProfileSpec::from_json(const nlohmann::json& j) {
    AgentProfileSpec spec;
    if (j.contains("proportions")) {
        const auto& p = j.at("proportions");
        spec.small_fraction = p.value("small", spec.small_fraction);
        spec.medium_fraction = p.value("medium", spec.medium_fraction);
        spec.large_fraction = p.value("large", spec.large_fraction);
    }
    spec.dtn_pool_size = j.value("dtn_pool_size", spec.dtn_pool_size);
    if (j.contains("dtn_count_range")) {
        spec.dtn_count_min = j.at("dtn_count_range").at(0).get<int>();
        spec.dtn_count_max = j.at("dtn_count_range").at(1).get<int>();
    }
    if (j.contains("dtn_score_range")) {
        spec.dtn_score_min = j.at("dtn_score_range").at(0).get<double>();
        spec.dtn_score_max = j.at("dtn_score_range").at(1).get<double>();
    }
    spec.validate();
    return spec;
}

WorkloadSpec WorkloadSpec::from_json(const nlohmann::json& j) {
    WorkloadSpec spec;
    spec.job_count = j.value("job_count", spec.job_count);
    if (j.contains("class_mix")) {
        const auto& m = j.at("class_mix");
        spec.lightweight_fraction = m.value("lightweight", spec.lightweight_fraction);
        spec.standard_fraction = m.value("standard", spec.standard_fraction);
        spec.resource_intensive_fraction =
            m.value("resource_intensive", spec.resource_intensive_fraction);
    }
    spec.size_bias_exponent = j.value("size_bias_exponent", spec.size_bias_exponent);
    if (j.contains("walltime_range_s")) {
        spec.walltime_min_s = j.at("walltime_range_s").at(0).get<double>();
        spec.walltime_max_s = j.at("walltime_range_s").at(1).get<double>();
    }
    spec.walltime_mean_s = j.value("walltime_mean_s", spec.walltime_mean_s);
    spec.submission_rate_per_s = j.value("submission_rate_per_s", spec.submission_rate_per_s);
    spec.gpu_standard_fraction = j.value("gpu_standard_fraction", spec.gpu_standard_fraction);
    spec.validate();
    return spec;
}

nlohmann::json population_to_json(const std::vector<AgentState>& agents) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : agents) {
        nlohmann::json scores = nlohmann::json::object();
        for (const auto& [d, s] : a.connectivity.scores) scores[d] = s;
        out.push_back({{"id", a.id},
                       {"level", a.level},
                       {"group", a.group_id},
                       {"site", a.site},
                       {"profile", to_string(a.profile)},
                       {"capacity",
                        {a.capacity.cpu, a.capacity.ram_gb, a.capacity.disk_gb, a.capacity.gpu}},
                       {"dtn_scores", scores}});
    }
    return out;
}

nlohmann::json jobs_to_json(const std::vector<GeneratedJob>& jobs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& g : jobs) {
        nlohmann::json in = nlohmann::json::array();
        for (const auto& r : g.job.data_in) in.push_back({r.dtn, r.file});
        nlohmann::json outs = nlohmann::json::array();
        for (const auto& r : g.job.data_out) outs.push_back({r.dtn, r.file});
        out.push_back({{"id", g.job.id},
                       {"class", to_string(g.job.job_class)},
                       {"requirements",
                        {g.job.requirements.cpu, g.job.requirements.ram_gb,
                         g.job.requirements.disk_gb, g.job.requirements.gpu}},
                       {"walltime_s", g.job.walltime_s},
                       {"data_in", in},
                       {"data_out", outs},
                       {"originator", g.originator},
                       {"submit_s", to_seconds(g.submit_at)}});
    }
    return out;
}

}  // namespace accord::workload

namespace accord {

const char* to_string(AgentProfile p) {
    switch (p) {
        case AgentProfile::Small: return "small";
        case AgentProfile::Medium: return "medium";
        case AgentProfile::Large: return "large";
    }
    return "unknown";
}

}  // namespace accord
