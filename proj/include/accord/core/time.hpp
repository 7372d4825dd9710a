#pragma once

#include <cstdint>

namespace accord {

// Simulated time in nanoseconds since run start. All agent, network and
// store timing runs on this clock; wall clock never enters the engine.
using SimTime = std::int64_t;
using SimDuration = std::int64_t;

constexpr SimDuration kNsPerUs = 1000;
constexpr SimDuration kNsPerMs = 1000 * 1000;
constexpr SimDuration kNsPerSec = 1000 * 1000 * 1000;

constexpr SimDuration from_seconds(double s) {
    return static_cast<SimDuration>(s * 1e9);
}

constexpr SimDuration from_millis(double ms) {
    return static_cast<SimDuration>(ms * 1e6);
}

constexpr SimDuration from_micros(double us) {
    return static_cast<SimDuration>(us * 1e3);
}

constexpr double to_seconds(SimTime t) {
    return static_cast<double>(t) / 1e9;
}

constexpr double to_millis(SimTime t) {
    return static_cast<double>(t) / 1e6;
}

}  // namespace accord
