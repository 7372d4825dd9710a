#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "accord/core/agent_state.hpp"
#include "accord/core/rng.hpp"
#include "accord/core/time.hpp"

namespace accord::sim {

// Site-pair RTT table. Intra-site RTTs are drawn once per site from the
// configured uniform range; inter-site RTTs come from the matrix and are
// symmetric unless both directions are given.
struct LatencyConfig {
    std::vector<SiteId> sites{"site0"};
    double intra_rtt_min_ms = 1.2;
    double intra_rtt_max_ms = 2.0;
    std::map<std::pair<SiteId, SiteId>, double> inter_rtt_ms;
    double jitter_frac = 0.0;  // per-message one-way jitter
    SiteId store_site;         // defaults to the first site

    static LatencyConfig from_json(const nlohmann::json& j, const std::string& base_dir);
};

class LatencyModel {
public:
    LatencyModel(const LatencyConfig& cfg, std::uint64_t seed);

    double rtt_ms(const SiteId& a, const SiteId& b) const;

    // One-way delay for a message; draws per-message jitter.
    SimDuration one_way(const SiteId& a, const SiteId& b);

    // RTT between a site and the store's home site.
    SimDuration store_round_trip(const SiteId& from) const;

    const SiteId& store_site() const { return store_site_; }

private:
    std::map<std::pair<SiteId, SiteId>, double> rtt_;
    double default_intra_ms_ = 1.6;
    double jitter_frac_ = 0.0;
    SiteId store_site_;
    Rng rng_;
};

}  // namespace accord::sim
