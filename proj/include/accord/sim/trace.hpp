#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "accord/core/rng.hpp"
#include "accord/core/time.hpp"

namespace accord::sim {

// Line-delimited structured trace plus a running FNV hash of every record.
// The hash is always maintained (it backs the determinism checks); the
// stream output is optional.
class TraceSink {
public:
    void attach(std::ostream* out) { out_ = out; }

    void rec(const char* kind, SimTime t, const std::string& a, const std::string& b,
             std::uint64_t extra = 0) {
        hash_ = fnv1a_str(kind, hash_);
        hash_ = fnv1a(&t, sizeof(t), hash_);
        hash_ = fnv1a_str(a, hash_);
        hash_ = fnv1a_str(b, hash_);
        hash_ = fnv1a(&extra, sizeof(extra), hash_);
        ++records_;
        if (out_) {
            (*out_) << "{\"t\":" << t << ",\"kind\":\"" << kind << "\",\"a\":\"" << a
                    << "\",\"b\":\"" << b << "\",\"x\":" << extra << "}\n";
        }
    }

    std::uint64_t hash() const { return hash_; }
    std::uint64_t records() const { return records_; }

private:
    std::ostream* out_ = nullptr;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
    std::uint64_t records_ = 0;
};

}  // namespace accord::sim
