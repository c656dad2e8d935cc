#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vfcw/collision.hpp"
#include "vfcw/error.hpp"
#include "vfcw/geometry.hpp"
#include "vfcw/random.hpp"

namespace vfcw::trajectory {

struct TrajectoryPoint {
    double time = 0.0;
    VehicleId vehicle_id;
    Vec2 pos;
    double speed = 0.0;   ///< m/s
    double heading = 0.0; ///< radians, atan2 convention
    Vec2 accel;           ///< m/s^2
    bool speed_reported = false;   ///< speed came from the input rather than differencing
    bool kinematics_valid = false; ///< false until derived (or generated)

    Vec2 velocity() const noexcept { return {speed * std::cos(heading), speed * std::sin(heading)}; }
};

using TrajectoryStore = std::map<VehicleId, std::vector<TrajectoryPoint>>;

enum class TrajectoryFormat {
    whitespace, ///< `time_s vehicle_id x_m y_m [speed_mps]`, whitespace separated
    csv,        ///< same columns, comma separated
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, TrajectoryFormat fmt) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    const auto is_sep = [fmt](char c) {
        return fmt == TrajectoryFormat::csv ? c == ',' : (c == ' ' || c == '\t' || c == '\r');
    };
    if (fmt == TrajectoryFormat::csv) {
        while (true) {
            const auto j = line.find(',', i);
            auto tok = line.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i);
            while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
            while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
                tok.remove_suffix(1);
            out.push_back(tok);
            if (j == std::string_view::npos) break;
            i = j + 1;
        }
        return out;
    }
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_sep(line[i])) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view tok) {
    double v = 0.0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline bool same_sample(const TrajectoryPoint& a, const TrajectoryPoint& b) {
    return a.pos == b.pos && a.speed_reported == b.speed_reported && (!a.speed_reported || a.speed == b.speed);
}

} // namespace detail

/// Parses a trajectory stream. Points come back grouped by vehicle, sorted by
/// time, with exact duplicate rows removed. Kinematics are not derived here.
inline TrajectoryStore load_trajectories(std::istream& in,
                                         TrajectoryFormat format = TrajectoryFormat::whitespace) {
    TrajectoryStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto toks = detail::split(line, format);
        if (toks.size() < 4 || toks.size() > 5) {
            throw ParseError(lineno, "expected 4 or 5 columns, got " + std::to_string(toks.size()));
        }
        const char* names[] = {"time", "", "x", "y", "speed"};
        double vals[5] = {};
        for (std::size_t c = 0; c < toks.size(); ++c) {
            if (c == 1) continue;
            const auto v = detail::parse_double(toks[c]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError(lineno, std::string("non-numeric ") + names[c] + " '" + std::string(toks[c]) + "'");
            }
            vals[c] = *v;
        }
        if (vals[0] < 0.0) throw ParseError(lineno, "negative time");
        if (toks[1].empty()) throw ParseError(lineno, "empty vehicle id");
        TrajectoryPoint p;
        p.time = vals[0];
        p.vehicle_id = std::string(toks[1]);
        p.pos = {vals[2], vals[3]};
        if (toks.size() == 5) {
            if (vals[4] < 0.0) throw ParseError(lineno, "negative speed");
            p.speed = vals[4];
            p.speed_reported = true;
        }
        store[p.vehicle_id].push_back(std::move(p));
    }
    for (auto& [id, pts] : store) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.time < b.time; });
        std::vector<TrajectoryPoint> dedup;
        dedup.reserve(pts.size());
        for (auto& p : pts) {
            if (!dedup.empty() && dedup.back().time == p.time) {
                if (!detail::same_sample(dedup.back(), p)) {
                    throw DataError("vehicle " + id + " has conflicting samples at t=" +
                                    detail::format_double(p.time));
                }
                continue;
            }
            dedup.push_back(std::move(p));
        }
        pts = std::move(dedup);
    }
    return store;
}

/// Canonical serialisation: rows ordered by time then vehicle, shortest
/// round-trip number formatting.
inline void write_trajectories(std::ostream& out, const TrajectoryStore& store,
                               TrajectoryFormat format = TrajectoryFormat::whitespace) {
    const char sep = format == TrajectoryFormat::csv ? ',' : ' ';
    std::vector<const TrajectoryPoint*> rows;
    for (const auto& [id, pts] : store) {
        for (const auto& p : pts) rows.push_back(&p);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TrajectoryPoint* a, const TrajectoryPoint* b) {
        return a->time < b->time;
    });
    out << "# time_s" << sep << "vehicle_id" << sep << "x_m" << sep << "y_m" << sep << "speed_mps\n";
    for (const auto* p : rows) {
        out << detail::format_double(p->time) << sep << p->vehicle_id << sep << detail::format_double(p->pos.x)
            << sep << detail::format_double(p->pos.y);
        if (p->speed_reported) out << sep << detail::format_double(p->speed);
        out << '\n';
    }
}

/// Fills speed, heading and acceleration by forward differences. The last
/// point copies the previous point's derivatives. A single point gets zero
/// derivatives and stays flagged as not derived.
inline std::vector<TrajectoryPoint> derive_kinematics(std::vector<TrajectoryPoint> points) {
    const std::size_t n = points.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (!(points[i].time > points[i - 1].time)) {
            throw DataError("derive_kinematics: times must strictly increase");
        }
    }
    if (n < 2) {
        for (auto& p : points) {
            if (!p.speed_reported) p.speed = 0.0;
            p.heading = 0.0;
            p.accel = {};
            p.kinematics_valid = false;
        }
        return points;
    }
    std::vector<Vec2> vel(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        vel[i] = (points[i + 1].pos - points[i].pos) * (1.0 / (points[i + 1].time - points[i].time));
    }
    vel[n - 1] = vel[n - 2];
    // Accelerations only from genuine differences; the tail repeats the last one.
    std::vector<Vec2> acc(n);
    std::size_t n_acc = 0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        acc[i] = (vel[i + 1] - vel[i]) * (1.0 / (points[i + 1].time - points[i].time));
        n_acc = i + 1;
    }
    for (std::size_t i = n_acc; i < n; ++i) acc[i] = n_acc > 0 ? acc[n_acc - 1] : Vec2{};

    for (std::size_t i = 0; i < n; ++i) {
        auto& p = points[i];
        const double fd_speed = vel[i].norm();
        if (!p.speed_reported) p.speed = fd_speed;
        p.heading = fd_speed > 0.0 ? std::atan2(vel[i].y, vel[i].x) : (i > 0 ? points[i - 1].heading : 0.0);
        p.accel = acc[i];
        p.kinematics_valid = true;
    }
    return points;
}

inline void derive_all(TrajectoryStore& store) {
    for (auto& [id, pts] : store) pts = derive_kinematics(std::move(pts));
}

struct KinematicState {
    double time = 0.0;
    Vec2 pos;
    Vec2 vel;
    Vec2 acc;
    double heading = 0.0;
};

/// True kinematic state at time t, extrapolated from the latest sample at or
/// before t. Empty outside the trajectory's time span.
inline std::optional<KinematicState> state_at(std::span<const TrajectoryPoint> points, double t) {
    if (points.empty() || t < points.front().time - kTimeEps || t > points.back().time + kTimeEps) {
        return std::nullopt;
    }
    auto it = std::upper_bound(points.begin(), points.end(), t + kTimeEps,
                               [](double v, const TrajectoryPoint& p) { return v < p.time; });
    const TrajectoryPoint& p = *(it - 1);
    const double dt = std::max(0.0, t - p.time);
    KinematicState s;
    s.time = t;
    const Vec2 v = p.velocity();
    s.pos = p.pos + v * dt + p.accel * (0.5 * dt * dt);
    s.vel = v + p.accel * dt;
    s.acc = p.accel;
    s.heading = p.heading;
    return s;
}

struct Scenario {
    TrajectoryStore vehicles;
    Vec2 fog_location;
    double comm_range = 500.0;
    double t_start = 0.0;
    double duration = 100.0;
    double slot_period = 1.0;
    double score_radius = 0.0; ///< scoring disk around the fog; 0 means 0.8 * comm_range

    double t_end() const noexcept { return t_start + duration; }

    /// Slots e_0 .. e_N with e_k = t_start + k * slot_period.
    int slot_count() const noexcept { return static_cast<int>(std::llround(duration / slot_period)); }
    double slot_time(int k) const noexcept { return t_start + k * slot_period; }

    bool in_coverage(Vec2 p) const noexcept { return distance(p, fog_location) <= comm_range; }

    double effective_score_radius() const noexcept { return score_radius > 0.0 ? score_radius : 0.8 * comm_range; }

    /// Points that count for scoring: inside the scoring disk at a slot time
    /// after the observation start.
    bool in_score_domain(double t, Vec2 p) const noexcept {
        return t > t_start + kTimeEps && t <= t_end() + kTimeEps &&
               distance(p, fog_location) <= effective_score_radius();
    }

    void validate() const {
        if (!(comm_range > 0.0)) throw ConfigError("comm_range must be positive");
        if (!(duration > 0.0)) throw ConfigError("duration must be positive");
        if (!(slot_period > 0.0)) throw ConfigError("slot_period must be positive");
        if (score_radius < 0.0 || score_radius > comm_range) {
            throw ConfigError("score_radius must lie in [0, comm_range]");
        }
    }
};

struct ScenarioStats {
    std::size_t vehicle_count = 0;
    double avg_speed_kmh = 0.0;
    double avg_accel = 0.0;
};

/// Cuts a fog-centred spatio-temporal slice out of a store. Vehicles that are
/// never inside the communication range during the window are dropped.
inline Scenario extract_scenario(const TrajectoryStore& store, Vec2 fog_location, double comm_range,
                                 double t_start, double duration, double slot_period) {
    Scenario sc;
    sc.fog_location = fog_location;
    sc.comm_range = comm_range;
    sc.t_start = t_start;
    sc.duration = duration;
    sc.slot_period = slot_period;
    sc.validate();
    for (const auto& [id, pts] : store) {
        std::vector<TrajectoryPoint> kept;
        bool seen_in_range = false;
        for (const auto& p : pts) {
            if (p.time < t_start - kTimeEps || p.time > sc.t_end() + kTimeEps) continue;
            seen_in_range = seen_in_range || sc.in_coverage(p.pos);
            kept.push_back(p);
        }
        if (seen_in_range) sc.vehicles.emplace(id, std::move(kept));
    }
    return sc;
}

inline ScenarioStats scenario_stats(const Scenario& sc) {
    ScenarioStats st;
    st.vehicle_count = sc.vehicles.size();
    double speed_sum = 0.0, accel_sum = 0.0;
    std::size_t n = 0;
    for (const auto& [id, pts] : sc.vehicles) {
        for (const auto& p : pts) {
            speed_sum += p.speed;
            accel_sum += p.accel.norm();
            ++n;
        }
    }
    if (n > 0) {
        st.avg_speed_kmh = speed_sum / static_cast<double>(n) * 3.6;
        st.avg_accel = accel_sum / static_cast<double>(n);
    }
    return st;
}

/// True positions on the slot grid e_1 .. e_N, restricted to the scoring
/// disk. e_0 is the observation start and is never scored.
inline std::vector<Track> ground_truth_tracks(const Scenario& sc) {
    std::vector<Track> tracks;
    const int n = sc.slot_count();
    for (const auto& [id, pts] : sc.vehicles) {
        Track tr{id, {}};
        for (int k = 1; k <= n; ++k) {
            const double t = sc.slot_time(k);
            const auto s = state_at(pts, t);
            if (s && sc.in_score_domain(t, s->pos)) tr.points.push_back({t, s->pos});
        }
        if (!tr.points.empty()) tracks.push_back(std::move(tr));
    }
    return tracks;
}

/// Ground-truth warning set W_d: the collision test applied to true
/// trajectories with perfect information, merged into episodes.
inline std::vector<CollisionEvent> expected_warnings(const Scenario& sc, double d_col, double headway_threshold) {
    if (!(d_col > 0.0)) throw ConfigError("d_col must be positive");
    if (!(headway_threshold > 0.0)) throw ConfigError("headway threshold must be positive");
    const auto tracks = ground_truth_tracks(sc);
    return merge_episodes(detect_pairs(tracks, d_col, headway_threshold), sc.slot_period);
}

// ---------------------------------------------------------------------------
// Synthetic intersection scenarios

struct SynthApproach {
    double heading_deg = 0.0; ///< direction of travel; 0 = eastbound, 90 = northbound
    int count = 0;
    std::vector<double> arrival_times; ///< optional explicit arrival times at the centre (s after t_start)
};

struct SynthSpec {
    std::string name = "synthetic";
    Vec2 center;
    double comm_range = 500.0;
    double t_start = 0.0;
    double duration = 100.0;
    double slot_period = 1.0;
    double sample_period = 0.0;  ///< trajectory sampling; 0 means slot_period
    double spawn_distance = 0.0; ///< vehicles appear this far from the centre; 0 means comm_range
    std::vector<SynthApproach> approaches;
    double speed_min = 8.0;
    double speed_max = 14.0;
    double accel_min = 0.0;
    double accel_max = 0.0;
    double first_arrival = 5.0;   ///< earliest arrival at the centre
    double arrival_spacing = 4.0; ///< minimum gap between successive arrivals on one approach
    double spacing_jitter = 2.0;  ///< extra uniform gap in [0, jitter)
    double lane_offset = 1.75;    ///< lateral offset to the right of the approach centreline

    void validate() const {
        if (!(comm_range > 0.0) || !(duration > 0.0) || !(slot_period > 0.0) || sample_period < 0.0 ||
            spawn_distance < 0.0) {
            throw ConfigError("synth: range, duration and slot period must be positive");
        }
        if (!(speed_min > 0.0) || speed_max < speed_min) throw ConfigError("synth: bad speed range");
        if (accel_max < accel_min) throw ConfigError("synth: bad acceleration range");
        if (first_arrival < 0.0 || arrival_spacing < 0.0 || spacing_jitter < 0.0) {
            throw ConfigError("synth: arrival timing must be non-negative");
        }
        for (const auto& a : approaches) {
            if (a.count < 0) throw ConfigError("synth: negative vehicle count");
            if (!a.arrival_times.empty() && static_cast<int>(a.arrival_times.size()) != a.count) {
                throw ConfigError("synth: arrival_times must list one time per vehicle");
            }
            for (double t : a.arrival_times) {
                if (t < 0.0) throw ConfigError("synth: negative arrival time");
            }
        }
    }
};

/// Straight-line, constant-acceleration approaches through a central
/// intersection. A vehicle appears on the first sample at which it is within
/// spawn_distance of the centre (or at t_start if it already is) and persists
/// to the end of the window. Deterministic in (spec, seed).
inline Scenario synth_scenario(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Scenario sc;
    sc.fog_location = spec.center;
    sc.comm_range = spec.comm_range;
    sc.t_start = spec.t_start;
    sc.duration = spec.duration;
    sc.slot_period = spec.slot_period;

    const double dt = spec.sample_period > 0.0 ? spec.sample_period : spec.slot_period;
    const int samples = static_cast<int>(std::llround(spec.duration / dt));
    const double spawn = spec.spawn_distance > 0.0 ? spec.spawn_distance : spec.comm_range;

    for (std::size_t ai = 0; ai < spec.approaches.size(); ++ai) {
        const auto& ap = spec.approaches[ai];
        const double th = ap.heading_deg * std::numbers::pi / 180.0;
        const Vec2 dir{std::cos(th), std::sin(th)};
        const Vec2 right{dir.y, -dir.x};
        double prev_arrival = 0.0;
        for (int n = 0; n < ap.count; ++n) {
            double arrival = 0.0;
            if (!ap.arrival_times.empty()) {
                arrival = ap.arrival_times[n];
            } else if (n == 0) {
                arrival = spec.first_arrival + uniform(rng, 0.0, spec.spacing_jitter);
            } else {
                arrival = prev_arrival + spec.arrival_spacing + uniform(rng, 0.0, spec.spacing_jitter);
            }
            prev_arrival = arrival;
            const double v0 = uniform(rng, spec.speed_min, spec.speed_max);
            double a = uniform(rng, spec.accel_min, spec.accel_max);
            // Keep the vehicle moving forward for as long as it can matter.
            const double horizon = std::max(spec.duration, arrival) + 10.0;
            if (v0 + a * horizon < 0.5) a = (0.5 - v0) / horizon;
            const double d0 = v0 * arrival + 0.5 * a * arrival * arrival;

            char id[32];
            std::snprintf(id, sizeof id, "a%zuv%03d", ai, n);
            std::vector<TrajectoryPoint> pts;
            for (int k = 0; k <= samples; ++k) {
                const double tau = k * dt;
                const double along = v0 * tau + 0.5 * a * tau * tau - d0; // signed position relative to the centre
                if (pts.empty() && along < -spawn) continue;
                TrajectoryPoint p;
                p.time = spec.t_start + tau;
                p.vehicle_id = id;
                p.pos = spec.center + dir * along + right * spec.lane_offset;
                p.speed = v0 + a * tau;
                p.heading = th;
                p.accel = dir * a;
                p.speed_reported = true;
                p.kinematics_valid = true;
                pts.push_back(std::move(p));
            }
            if (!pts.empty()) sc.vehicles.emplace(id, std::move(pts));
        }
    }
    return sc;
}

} // namespace vfcw::trajectory
