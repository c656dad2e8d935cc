#pragma once

// Pairwise "same point within headway" test shared by the fog detector and the
// ground-truth oracle, plus episode merging of raw detections.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vfcw/geometry.hpp"

namespace vfcw {

using VehicleId = std::string;

/// Times closer than this are treated as equal in threshold comparisons, so
/// grid times produced by different arithmetic paths compare consistently.
inline constexpr double kTimeEps = 1e-9;

/// Unordered vehicle pair, stored with first < second.
struct VehiclePair {
    VehicleId first;
    VehicleId second;

    auto operator<=>(const VehiclePair&) const = default;
};

struct CollisionEvent {
    VehiclePair pair;
    double point_time_a = 0.0; ///< when pair.first passes the common point
    double point_time_b = 0.0; ///< when pair.second passes it
    Vec2 location;             ///< midpoint of the two matched points
    Vec2 pos_a;                ///< pair.first's point
    Vec2 pos_b;                ///< pair.second's point
    double headway = 0.0;      ///< |point_time_a - point_time_b|
    double start = 0.0;        ///< episode interval; a raw detection spans [min, max] of its point times
    double end = 0.0;

    bool operator==(const CollisionEvent&) const = default;
};

inline bool event_less(const CollisionEvent& a, const CollisionEvent& b) {
    return std::tie(a.pair, a.start, a.end, a.point_time_a, a.point_time_b) <
           std::tie(b.pair, b.start, b.end, b.point_time_a, b.point_time_b);
}

inline CollisionEvent make_event(const VehicleId& a, double ta, Vec2 pa, const VehicleId& b, double tb,
                                 Vec2 pb) {
    CollisionEvent e;
    if (b < a) {
        std::swap(ta, tb);
        std::swap(pa, pb);
        e.pair = {b, a};
    } else {
        e.pair = {a, b};
    }
    e.point_time_a = ta;
    e.point_time_b = tb;
    e.pos_a = pa;
    e.pos_b = pb;
    e.location = (pa + pb) * 0.5;
    e.headway = std::abs(ta - tb);
    e.start = std::min(ta, tb);
    e.end = std::max(ta, tb);
    return e;
}

struct TimedPoint {
    double time = 0.0;
    Vec2 pos;
};

struct Track {
    VehicleId vehicle_id;
    std::vector<TimedPoint> points;
};

/// True when two timed points count as the same roadway point passed within
/// the headway threshold.
inline bool conflicts(const TimedPoint& u, const TimedPoint& v, double d_col, double headway_threshold) {
    return distance(u.pos, v.pos) < d_col && std::abs(u.time - v.time) < headway_threshold - kTimeEps;
}

namespace detail {

struct Box {
    double x0, y0, x1, y1;
};

inline Box bounds(const Track& t) {
    Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (const auto& p : t.points) {
        b.x0 = std::min(b.x0, p.pos.x);
        b.y0 = std::min(b.y0, p.pos.y);
        b.x1 = std::max(b.x1, p.pos.x);
        b.y1 = std::max(b.y1, p.pos.y);
    }
    return b;
}

inline bool near(const Box& a, const Box& b, double d) {
    return a.x0 - d <= b.x1 && b.x0 - d <= a.x1 && a.y0 - d <= b.y1 && b.y0 - d <= a.y1;
}

} // namespace detail

/// Every cross point pair of every vehicle pair that passes the conflict test.
/// Output is sorted with event_less.
inline std::vector<CollisionEvent> detect_pairs(std::span<const Track> input, double d_col,
                                                double headway_threshold) {
    std::vector<Track> tracks(input.begin(), input.end());
    const auto by_time = [](const TimedPoint& a, const TimedPoint& b) { return a.time < b.time; };
    for (auto& t : tracks) {
        if (!std::is_sorted(t.points.begin(), t.points.end(), by_time)) {
            std::stable_sort(t.points.begin(), t.points.end(), by_time);
        }
    }
    std::vector<detail::Box> boxes;
    boxes.reserve(tracks.size());
    for (const auto& t : tracks) boxes.push_back(detail::bounds(t));

    std::vector<CollisionEvent> out;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = i + 1; j < tracks.size(); ++j) {
            const Track& a = tracks[i];
            const Track& b = tracks[j];
            if (a.vehicle_id == b.vehicle_id || !detail::near(boxes[i], boxes[j], d_col)) continue;
            auto lo = b.points.begin();
            for (const auto& u : a.points) {
                while (lo != b.points.end() && lo->time <= u.time - headway_threshold) ++lo;
                for (auto v = lo; v != b.points.end() && v->time < u.time + headway_threshold; ++v) {
                    if (conflicts(u, *v, d_col, headway_threshold)) {
                        out.push_back(make_event(a.vehicle_id, u.time, u.pos, b.vehicle_id, v->time, v->pos));
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), event_less);
    return out;
}

/// Collapses detections of the same pair whose intervals overlap or are at most
/// `gap` apart into one episode. The representative point data is the
/// smallest-headway detection (earliest on ties).
inline std::vector<CollisionEvent> merge_episodes(std::vector<CollisionEvent> raw, double gap) {
    std::sort(raw.begin(), raw.end(), [](const CollisionEvent& a, const CollisionEvent& b) {
        return std::tie(a.pair, a.start, a.end) < std::tie(b.pair, b.start, b.end);
    });
    std::vector<CollisionEvent> out;
    for (auto& e : raw) {
        if (!out.empty() && out.back().pair == e.pair && e.start <= out.back().end + gap + kTimeEps) {
            auto& cur = out.back();
            const double start = std::min(cur.start, e.start);
            const double end = std::max(cur.end, e.end);
            if (e.headway < cur.headway - kTimeEps) cur = e;
            cur.start = start;
            cur.end = end;
            continue;
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), event_less);
    return out;
}

} // namespace vfcw
