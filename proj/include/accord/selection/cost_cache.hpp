#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <unordered_map>

#include "accord/core/job.hpp"
#include "accord/core/time.hpp"

namespace accord::selection {

// Version-keyed cache key: any state change to the agent or the job bumps a
// version and therefore misses.
struct CacheKey {
    AgentId agent;
    JobId job;
    std::uint64_t agent_version = 0;
    std::uint64_t job_version = 0;

    bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const {
        std::size_t h = std::hash<std::string>{}(k.agent);
        h ^= std::hash<std::string>{}(k.job) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::uint64_t>{}(k.agent_version) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::uint64_t>{}(k.job_version) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

// LRU + TTL cache for cost values. Owned by a single agent; never shared.
class CostCache {
public:
    CostCache(std::size_t capacity, SimDuration ttl)
        : capacity_(capacity ? capacity : 1), ttl_(ttl) {}

    template <class F>
    double get_or_compute(const CacheKey& key, SimTime now, F&& compute) {
        auto it = index_.find(key);
        if (it != index_.end()) {
            Entry& e = *it->second;
            if (now - e.stored_at < ttl_) {
                ++hits_;
                lru_.splice(lru_.begin(), lru_, it->second);
                return e.value;
            }
            // expired: drop and recompute
            lru_.erase(it->second);
            index_.erase(it);
        }
        ++misses_;
        double v = compute();
        insert(key, v, now);
        return v;
    }

    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }
    std::size_t size() const { return index_.size(); }
    void clear() {
        lru_.clear();
        index_.clear();
    }

private:
    struct Entry {
        CacheKey key;
        double value;
        SimTime stored_at;
    };

    void insert(const CacheKey& key, double value, SimTime now) {
        if (index_.size() >= capacity_) {
            const Entry& victim = lru_.back();
            index_.erase(victim.key);
            lru_.pop_back();
        }
        lru_.push_front(Entry{key, value, now});
        index_[key] = lru_.begin();
    }

    std::size_t capacity_;
    SimDuration ttl_;
    std::list<Entry> lru_;
    std::unordered_map<CacheKey, std::list<Entry>::iterator, CacheKeyHash> index_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

}  // namespace accord::selection
