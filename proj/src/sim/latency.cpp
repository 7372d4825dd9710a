#include "accord/sim/latency.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "accord/core/rng.hpp"

namespace accord::sim {

namespace {

std::pair<SiteId, SiteId> ordered(const SiteId& a, const SiteId& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

LatencyConfig LatencyConfig::from_json(const nlohmann::json& in, const std::string& base_dir) {
    nlohmann::json j = in;
    if (j.contains("file")) {
        std::string path = j.at("file").get<std::string>();
        if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
        std::ifstream f(path);
        if (!f) throw std::runtime_error("latency file not found: " + path);
        j = nlohmann::json::parse(f);
    }
    LatencyConfig cfg;
    if (j.contains("sites")) cfg.sites = j.at("sites").get<std::vector<SiteId>>();
    if (cfg.sites.empty()) cfg.sites = {"site0"};
    if (j.contains("intra_rtt_ms")) {
        const auto& r = j.at("intra_rtt_ms");
        cfg.intra_rtt_min_ms = r.at(0).get<double>();
        cfg.intra_rtt_max_ms = r.at(1).get<double>();
    }
    if (j.contains("rtt_matrix_ms")) {
        for (const auto& [a, row] : j.at("rtt_matrix_ms").items()) {
            for (const auto& [b, v] : row.items()) {
                cfg.inter_rtt_ms[{a, b}] = v.get<double>();
            }
        }
    }
    cfg.jitter_frac = j.value("jitter_frac", 0.0);
    cfg.store_site = j.value("store_site", cfg.sites.front());
    return cfg;
}

LatencyModel::LatencyModel(const LatencyConfig& cfg, std::uint64_t seed)
    : jitter_frac_(cfg.jitter_frac),
      store_site_(cfg.store_site.empty() ? cfg.sites.front() : cfg.store_site),
      rng_(seed ^ 0x6c61746e65637900ULL) {
    for (const auto& s : cfg.sites) {
        rtt_[{s, s}] = rng_.uniform(cfg.intra_rtt_min_ms, cfg.intra_rtt_max_ms);
    }
    default_intra_ms_ = 0.5 * (cfg.intra_rtt_min_ms + cfg.intra_rtt_max_ms);
    for (const auto& [pair, ms] : cfg.inter_rtt_ms) {
        rtt_[ordered(pair.first, pair.second)] = ms;
    }
}

double LatencyModel::rtt_ms(const SiteId& a, const SiteId& b) const {
    auto it = rtt_.find(ordered(a, b));
    if (it != rtt_.end()) return it->second;
    if (a == b) return default_intra_ms_;
    throw std::runtime_error("no RTT configured between sites " + a + " and " + b);
}

SimDuration LatencyModel::one_way(const SiteId& a, const SiteId& b) {
    double ms = rtt_ms(a, b) / 2.0;
    if (jitter_frac_ > 0.0) {
        ms *= (1.0 + rng_.uniform(-jitter_frac_, jitter_frac_));
    }
    return from_millis(ms);
}

SimDuration LatencyModel::store_round_trip(const SiteId& from) const {
    return from_millis(rtt_ms(from, store_site_));
}

}  // namespace accord::sim
