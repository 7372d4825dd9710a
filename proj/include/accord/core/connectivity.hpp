#pragma once

#include <map>
#include <set>
#include <string>

namespace accord {

// Named data-transfer-node endpoint.
using DtnId = std::string;

// Per-DTN connectivity quality in [0,1]. Endpoints absent from the map
// score 0.
struct ConnectivityProfile {
    std::map<DtnId, double> scores;

    double score(const DtnId& d) const {
        auto it = scores.find(d);
        return it == scores.end() ? 0.0 : it->second;
    }

    // Mean score over the given endpoints; an empty set means the job has no
    // data requirements and is treated as perfectly connected.
    double mean_score(const std::set<DtnId>& dtns) const {
        if (dtns.empty()) return 1.0;
        double sum = 0.0;
        for (const auto& d : dtns) sum += score(d);
        return sum / static_cast<double>(dtns.size());
    }

    // True when every endpoint in the set has a positive score.
    bool covers(const std::set<DtnId>& dtns) const {
        for (const auto& d : dtns) {
            if (score(d) <= 0.0) return false;
        }
        return true;
    }

    bool valid() const {
        for (const auto& [d, s] : scores) {
            if (s < 0.0 || s > 1.0) return false;
        }
        return true;
    }

    bool operator==(const ConnectivityProfile&) const = default;
};

}  // namespace accord
