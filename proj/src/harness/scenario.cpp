#include "accord/harness/scenario.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace accord::harness {

namespace {

selection::Weights weights_from(const nlohmann::json& j, selection::Weights def) {
    def.cpu = j.value("cpu", def.cpu);
    def.ram = j.value("ram", def.ram);
    def.disk = j.value("disk", def.disk);
    def.gpu = j.value("gpu", def.gpu);
    return def;
}

std::vector<runtime::ScheduleEntry> schedule_from(const nlohmann::json& arr) {
    std::vector<runtime::ScheduleEntry> out;
    for (const auto& e : arr) {
        runtime::ScheduleEntry s;
        const std::string kind = e.value("kind", "");
        if (kind == "crash") {
            s.kind = runtime::ScheduleEntry::Kind::Crash;
            s.agent = e.at("agent").get<std::string>();
            s.at_s = e.at("at_s").get<double>();
        } else if (kind == "join") {
            s.kind = runtime::ScheduleEntry::Kind::Join;
            s.at_s = e.at("at_s").get<double>();
            s.count = e.value("count", 1);
            s.group = e.at("group").get<std::string>();
            s.site = e.value("site", "");
        } else if (kind == "partition" || kind == "delay") {
            s.kind = kind == "partition" ? runtime::ScheduleEntry::Kind::Partition
                                         : runtime::ScheduleEntry::Kind::Delay;
            s.a = e.at("a").get<std::string>();
            s.b = e.at("b").get<std::string>();
            s.at_s = e.at("from_s").get<double>();
            s.until_s = e.at("to_s").get<double>();
            if (s.kind == runtime::ScheduleEntry::Kind::Delay) {
                s.extra_ms = e.at("extra_ms").get<double>();
            }
        } else {
            throw ConfigError("schedule entry kind must be crash|join|partition|delay, got '" +
                              kind + "'");
        }
        out.push_back(std::move(s));
    }
    return out;
}

// "sites" + "site_policy" expand to an explicit site_map over the built
// topology: per_group pins each group to one site; round_robin deals agents
// across sites.
void expand_sites(topology::TopologySpec& spec, const nlohmann::json& jt,
                  const std::vector<SiteId>& sites) {
    if (!spec.site_map.empty() || sites.empty()) return;
    const std::string policy = jt.value("site_policy", "single");
    topology::Topology built = topology::build_topology(spec);
    if (policy == "single") {
        for (const auto& a : built.agents) spec.site_map[a.id] = sites.front();
        return;
    }
    if (policy == "round_robin") {
        std::size_t i = 0;
        for (const auto& a : built.agents) {
            spec.site_map[a.id] = sites[i++ % sites.size()];
        }
        return;
    }
    if (policy == "per_group") {
        std::size_t gi = 0;
        for (const auto& [gid, g] : built.groups) {
            if (g.level != 0) continue;
            const SiteId& site = sites[gi++ % sites.size()];
            for (const auto& m : g.members) spec.site_map[m] = site;
            if (g.parent_coordinator) spec.site_map[*g.parent_coordinator] = site;
        }
        // anything unassigned (upper coordinators) goes round-robin
        std::size_t i = 0;
        for (const auto& a : built.agents) {
            if (!spec.site_map.count(a.id)) spec.site_map[a.id] = sites[i++ % sites.size()];
        }
        return;
    }
    throw ConfigError("topology.site_policy must be single|per_group|round_robin");
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& j, const std::string& base_dir) {
    Scenario sc;
    try {
        sc.name = j.value("name", "unnamed");
        sc.seed_base = j.value("seed_base", 42ULL);
        sc.repetitions = j.value("repetitions", 1);
        sc.budget_s = j.value("budget_s", 0.0);
        sc.livelock_span_s = j.value("livelock_span_s", 120.0);
        sc.long_running = j.value("long_running", false);
        sc.stop = j.value("stop", "all_terminal");

        if (!j.contains("topology")) throw ConfigError("missing 'topology' section");
        sc.topo = topology::TopologySpec::from_json(j.at("topology"));

        if (j.contains("latency")) {
            sc.latency = sim::LatencyConfig::from_json(j.at("latency"), base_dir);
        }
        if (j.contains("topology")) {
            expand_sites(sc.topo, j.at("topology"), sc.latency.sites);
        }
        sc.topo.validate();

        if (j.contains("agents")) sc.profiles = workload::AgentProfileSpec::from_json(j.at("agents"));
        if (j.contains("workload")) sc.workload = workload::WorkloadSpec::from_json(j.at("workload"));

        if (j.contains("cost")) {
            const auto& c = j.at("cost");
            sc.cost.theta = c.value("theta", sc.cost.theta);
            sc.cost.beta = c.value("beta", sc.cost.beta);
            sc.cost.tau_s = c.value("tau_s", sc.cost.tau_s);
            sc.cost.cache_ttl_s = c.value("cache_ttl_s", sc.cost.cache_ttl_s);
            sc.cost.cache_capacity = c.value("cache_capacity", sc.cost.cache_capacity);
            sc.cost.batch = c.value("batch", sc.cost.batch);
            sc.cost.strict_connectivity = c.value("strict_connectivity", false);
            sc.cost.data_disk_shift = c.value("data_disk_shift", sc.cost.data_disk_shift);
            if (c.contains("weights")) {
                const auto& w = c.at("weights");
                if (w.contains("lightweight"))
                    sc.cost.lightweight_weights =
                        weights_from(w.at("lightweight"), sc.cost.lightweight_weights);
                if (w.contains("standard"))
                    sc.cost.standard_weights =
                        weights_from(w.at("standard"), sc.cost.standard_weights);
                if (w.contains("resource_intensive"))
                    sc.cost.resource_intensive_weights = weights_from(
                        w.at("resource_intensive"), sc.cost.resource_intensive_weights);
            }
            sc.cost.validate();
        }

        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            sc.detector.heartbeat_interval_s =
                d.value("heartbeat_interval_s", sc.detector.heartbeat_interval_s);
            sc.detector.heartbeat_threshold_s =
                d.value("heartbeat_threshold_s", sc.detector.heartbeat_threshold_s);
            sc.detector.threshold_jitter_frac =
                d.value("threshold_jitter_frac", sc.detector.threshold_jitter_frac);
            sc.detector.channel_probe_interval_ms =
                d.value("channel_probe_interval_ms", sc.detector.channel_probe_interval_ms);
            sc.detector.probe_failures_to_trip =
                d.value("probe_failures_to_trip", sc.detector.probe_failures_to_trip);
            sc.detector.channel_event_delay_ms =
                d.value("channel_event_delay_ms", sc.detector.channel_event_delay_ms);
            sc.detector.fast_path_enabled =
                d.value("fast_path_enabled", sc.detector.fast_path_enabled);
            sc.detector.validate();
        }

        if (j.contains("engine")) {
            const auto& e = j.at("engine");
            sc.engine.batch = sc.cost.batch;
            sc.engine.phase_timeout_s = e.value("phase_timeout_s", sc.engine.phase_timeout_s);
            sc.engine.ooo_buffer_s = e.value("ooo_buffer_s", sc.engine.ooo_buffer_s);
            sc.engine.prune_after_s = e.value("prune_after_s", sc.engine.prune_after_s);
            sc.tuning.tick_interval_ms = e.value("tick_interval_ms", sc.tuning.tick_interval_ms);
            sc.tuning.delegation_timeout_s =
                e.value("delegation_timeout_s", sc.tuning.delegation_timeout_s);
            sc.tuning.aggregation_refresh_s =
                e.value("aggregation_refresh_s", sc.tuning.aggregation_refresh_s);
            sc.tuning.msg_service_us = e.value("msg_service_us", sc.tuning.msg_service_us);
            sc.tuning.tick_service_us = e.value("tick_service_us", sc.tuning.tick_service_us);
            sc.tuning.cost_eval_service_us =
                e.value("cost_eval_service_us", sc.tuning.cost_eval_service_us);
            sc.tuning.store_op_service_us =
                e.value("store_op_service_us", sc.tuning.store_op_service_us);
            sc.tuning.infeasible_confirm_s =
                e.value("infeasible_confirm_s", sc.tuning.infeasible_confirm_s);
        } else {
            sc.engine.batch = sc.cost.batch;
        }

        if (j.contains("schedule")) sc.schedule = schedule_from(j.at("schedule"));
        if (j.contains("schedule_file")) {
            std::string path = j.at("schedule_file").get<std::string>();
            if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
            std::ifstream f(path);
            if (!f) throw ConfigError("schedule file not found: " + path);
            auto extra = schedule_from(nlohmann::json::parse(f));
            sc.schedule.insert(sc.schedule.end(), extra.begin(), extra.end());
        }

        // joins into relay overlays are not supported
        for (const auto& e : sc.schedule) {
            if (e.kind == runtime::ScheduleEntry::Kind::Join &&
                sc.topo.kind == topology::TopologyKind::Ring) {
                throw ConfigError("dynamic join is not supported on ring overlays");
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("scenario '") + sc.name + "': " + ex.what());
    }
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f, nullptr, /*allow_exceptions=*/true,
                                  /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& ex) {
        // nlohmann reports the byte offset; surface it as a diagnostic
        throw ConfigError(path + ": " + ex.what());
    }
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return from_json(j, base);
}

runtime::WorldConfig Scenario::world_config(int repetition, std::uint64_t seed_override) const {
    runtime::WorldConfig cfg;
    cfg.topo = topo;
    cfg.profiles = profiles;
    cfg.workload = workload;
    cfg.cost = cost;
    cfg.detector = detector;
    cfg.engine = engine;
    cfg.tuning = tuning;
    cfg.latency = latency;
    cfg.schedule = schedule;
    cfg.budget_s = budget_s;
    cfg.livelock_span_s = livelock_span_s;
    std::uint64_t base = seed_override ? seed_override : seed_base;
    cfg.seed = base + static_cast<std::uint64_t>(repetition);
    return cfg;
}

}  // namespace accord::harness
