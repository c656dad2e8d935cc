#pragma once

// Bundled synthetic intersection scenarios. Densities, speeds and
// accelerations loosely follow five urban intersections observed over 100 s.

#include <string>
#include <string_view>
#include <vector>

#include "vfcw/error.hpp"
#include "vfcw/random.hpp"
#include "vfcw/trajectory.hpp"

namespace vfcw::suite {

struct Entry {
    std::string_view name;
    Vec2 center;
    int per_approach;
    double speed_min, speed_max; // m/s
    double accel_abs;            // accelerations drawn from [-accel_abs, accel_abs]
};

inline constexpr Entry kEntries[] = {
    {"s1", {10422.0, 12465.3}, 14, 12.0, 16.0, 0.40},
    {"s2", {10422.0, 12465.3}, 20, 11.0, 15.0, 0.014},
    {"s3", {10422.0, 12465.3}, 26, 9.0, 12.2, 0.15},
    {"s4", {6097.1, 14870.0}, 21, 17.0, 21.4, 0.33},
    {"s5", {6097.1, 14870.0}, 28, 17.0, 21.4, 0.12},
};

inline std::vector<std::string> names() {
    std::vector<std::string> out;
    for (const auto& e : kEntries) out.emplace_back(e.name);
    return out;
}

inline const Entry& entry(std::string_view name) {
    for (const auto& e : kEntries) {
        if (e.name == name) return e;
    }
    throw ConfigError("unknown suite scenario '" + std::string(name) + "'");
}

/// Four-way intersection, 500 m coverage, 100 s at 1 Hz.
inline trajectory::SynthSpec spec(std::string_view name) {
    const Entry& e = entry(name);
    trajectory::SynthSpec s;
    s.name = std::string(e.name);
    s.center = e.center;
    s.comm_range = 500.0;
    s.t_start = 0.0;
    s.duration = 100.0;
    s.slot_period = 1.0;
    for (double h : {0.0, 90.0, 180.0, 270.0}) s.approaches.push_back({h, e.per_approach, {}});
    s.speed_min = e.speed_min;
    s.speed_max = e.speed_max;
    s.accel_min = -e.accel_abs;
    s.accel_max = e.accel_abs;
    const double gap = 120.0 / e.per_approach; // mean arrival gap per approach
    s.first_arrival = 0.0;
    s.arrival_spacing = 0.5 * gap;
    s.spacing_jitter = gap;
    s.lane_offset = 1.75;
    return s;
}

inline std::uint64_t seed(std::string_view name) { return fnv1a(name); }

inline trajectory::Scenario scenario(std::string_view name) { return trajectory::synth_scenario(spec(name), seed(name)); }

} // namespace vfcw::suite
