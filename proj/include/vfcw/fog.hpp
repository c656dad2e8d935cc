#pragma once

// Fog-node logic: Record/Detection loss handling, trajectory calibration and
// prediction, the headway collision test, and the uncalibrated baselines.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfcw/channel.hpp"
#include "vfcw/collision.hpp"
#include "vfcw/error.hpp"
#include "vfcw/geometry.hpp"
#include "vfcw/stable.hpp"

namespace vfcw::fog {

using channel::StatusPacket;

struct PacketRecord {
    StatusPacket packet;
    double receive_time = 0.0;
    bool recovered = false; ///< injected from history by the loss detector
};

enum class Algorithm { tccw, fwc, cbw };

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "TCCW" || s == "tccw") return Algorithm::tccw;
    if (s == "FWC" || s == "fwc") return Algorithm::fwc;
    if (s == "CBW" || s == "cbw") return Algorithm::cbw;
    throw ConfigError("unknown algorithm '" + std::string(s) + "' (expected TCCW, FWC or CBW)");
}

inline std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::tccw: return "TCCW";
    case Algorithm::fwc: return "FWC";
    case Algorithm::cbw: return "CBW";
    }
    return "?";
}

enum class LatencyEstimator {
    random, ///< one stable draw per packet
    mean,   ///< the distribution mean
};

inline LatencyEstimator parse_estimator(std::string_view s) {
    if (s == "random") return LatencyEstimator::random;
    if (s == "mean") return LatencyEstimator::mean;
    throw ConfigError("unknown latency estimator '" + std::string(s) + "'");
}

inline std::string_view to_string(LatencyEstimator e) {
    return e == LatencyEstimator::random ? "random" : "mean";
}

struct FogConfig {
    Vec2 location;
    double comm_range = 500.0;   ///< R
    double tau = 10.0;           ///< leave-distance margin, m
    double gamma = 0.2;          ///< lateness margin, s
    double headway = 1.0;        ///< iota, s
    double d_col = 2.0;          ///< same-point radius, m
    double predict_horizon = 5.0; ///< e_pre, s
    double slot_period = 1.0;    ///< 1/xi, s
    stable::StableParams latency_params = channel::kFogDsrcParams;
    LatencyEstimator estimator = LatencyEstimator::random;

    void validate() const {
        if (!(comm_range > 0.0)) throw ConfigError("comm_range must be positive");
        if (!(tau >= 0.0)) throw ConfigError("tau must be non-negative");
        if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
        if (!(headway > 0.0)) throw ConfigError("headway threshold must be positive");
        if (!(d_col > 0.0)) throw ConfigError("d_col must be positive");
        if (!(predict_horizon > 0.0)) throw ConfigError("predict_horizon must be positive");
        if (!(slot_period > 0.0)) throw ConfigError("slot_period must be positive");
        if (!latency_params.valid()) throw ConfigError("invalid latency parameters");
    }

    /// Records kept per vehicle.
    std::size_t history_capacity() const {
        return static_cast<std::size_t>(std::ceil((slot_period + gamma + 5.0) / slot_period - 1e-9));
    }

    int horizon_steps() const { return static_cast<int>(std::ceil(predict_horizon / slot_period - 1e-9)); }
};

struct FogState {
    explicit FogState(FogConfig c) : config(std::move(c)) { config.validate(); }

    FogConfig config;
    std::set<VehicleId> id_set;                           ///< ID_{e_k}
    std::map<VehicleId, std::deque<PacketRecord>> history; ///< H, bounded per vehicle
    std::map<VehicleId, PacketRecord> current;             ///< working set M_{e_k}, one record per vehicle
    std::set<VehicleId> received_ids;                      ///< ID_{M_{e_k}}

    /// Record with the greatest sensed time, or null.
    const PacketRecord* latest(const VehicleId& id) const {
        const auto it = history.find(id);
        if (it == history.end() || it->second.empty()) return nullptr;
        const PacketRecord* best = &it->second.front();
        for (const auto& r : it->second) {
            if (r.packet.sensed_time > best->packet.sensed_time) best = &r;
        }
        return best;
    }
};

/// Record step for slot e_k. Returns ID_{M_{e_k}}.
///
/// Vehicles whose newest record is older than the retention window are
/// forgotten, so the detector cannot keep replaying a stale packet.
inline std::set<VehicleId> record_step(FogState& state, std::span<const PacketRecord> received, double e_k) {
    state.current.clear();
    state.received_ids.clear();
    for (const auto& r : received) {
        auto [it, inserted] = state.current.try_emplace(r.packet.vehicle_id, r);
        if (!inserted && r.packet.sensed_time > it->second.packet.sensed_time) it->second = r;
        state.received_ids.insert(r.packet.vehicle_id);
        state.id_set.insert(r.packet.vehicle_id);
    }
    const std::size_t cap = state.config.history_capacity();
    for (const auto& [id, r] : state.current) {
        auto& h = state.history[id];
        h.push_back(r);
        while (h.size() > cap) {
            // Evict the oldest, never the newest.
            auto oldest = std::min_element(h.begin(), h.end(), [](const PacketRecord& a, const PacketRecord& b) {
                return a.packet.sensed_time < b.packet.sensed_time;
            });
            h.erase(oldest);
        }
    }
    const double retention = static_cast<double>(cap) * state.config.slot_period;
    for (auto it = state.history.begin(); it != state.history.end();) {
        const PacketRecord* last = state.latest(it->first);
        if (last == nullptr || e_k - last->receive_time > retention + kTimeEps) {
            state.id_set.erase(it->first);
            it = state.history.erase(it);
        } else {
            ++it;
        }
    }
    return state.received_ids;
}

struct DetectionResult {
    std::vector<VehicleId> removed;   ///< judged to have left the range
    std::vector<VehicleId> recovered; ///< declared lost; historical packet injected
};

/// Detection step for slot e_k. Must follow record_step for the same slot.
inline DetectionResult detect_losses(FogState& state, double e_k) {
    DetectionResult out;
    const auto& c = state.config;
    std::vector<VehicleId> missing;
    std::set_difference(state.id_set.begin(), state.id_set.end(), state.received_ids.begin(),
                        state.received_ids.end(), std::back_inserter(missing));
    for (const auto& id : missing) {
        const PacketRecord* last = state.latest(id);
        if (last == nullptr) throw Error("fog state inconsistent: vehicle " + id + " tracked without history");
        if (distance(last->packet.location, c.location) >= c.comm_range - c.tau) {
            state.id_set.erase(id);
            out.removed.push_back(id);
        } else if (e_k - last->receive_time > c.slot_period + c.gamma + kTimeEps) {
            PacketRecord injected = *last;
            injected.recovered = true;
            state.current[id] = injected;
            out.recovered.push_back(id);
        }
    }
    return out;
}

/// Latency estimate in ms.
template <class Engine>
double estimate_latency(const FogConfig& config, Engine& rng) {
    if (config.estimator == LatencyEstimator::mean) return std::max(0.0, stable::mean(config.latency_params));
    return channel::sample_nonnegative(config.latency_params, rng);
}

struct CalibratedState {
    Vec2 pos;
    Vec2 vel;
    Vec2 acc;
    double elapsed = 0.0; ///< e_ts, s
};

/// Advances the packet's kinematics by e_ts = (e_k - receive_time) + latency.
inline CalibratedState calibrate_state(const StatusPacket& p, double receive_time, double e_k,
                                       double latency_estimate_ms) {
    if (latency_estimate_ms < 0.0) throw DomainError("latency estimate must be non-negative");
    const double e_ts = (e_k - receive_time) + latency_estimate_ms / 1000.0;
    CalibratedState s;
    s.elapsed = e_ts;
    s.pos = p.location + p.velocity * e_ts + p.acceleration * (0.5 * e_ts * e_ts);
    s.vel = p.velocity + p.acceleration * e_ts;
    s.acc = p.acceleration;
    return s;
}

inline Vec2 calibrate(const StatusPacket& p, double receive_time, double e_k, double latency_estimate_ms) {
    return calibrate_state(p, receive_time, e_k, latency_estimate_ms).pos;
}

/// The packet taken at face value as the state at e_k.
inline CalibratedState uncalibrated_state(const StatusPacket& p) {
    return {p.location, p.velocity, p.acceleration, 0.0};
}

struct PredictedTrajectory {
    VehicleId vehicle_id;
    std::vector<TimedPoint> points;
};

/// Points at e_k + j * slot for j = 1 .. ceil(horizon / slot).
inline PredictedTrajectory predict_trajectory(const VehicleId& id, const CalibratedState& s, double e_k,
                                              const FogConfig& c) {
    PredictedTrajectory tr{id, {}};
    const int n = c.horizon_steps();
    tr.points.reserve(n);
    for (int j = 1; j <= n; ++j) {
        const double dt = j * c.slot_period;
        tr.points.push_back({e_k + dt, s.pos + s.vel * dt + s.acc * (0.5 * dt * dt)});
    }
    return tr;
}

struct WarningSet {
    double slot_time = 0.0;
    std::set<VehicleId> flagged;
    std::vector<CollisionEvent> pair_events; ///< raw point-pair detections, sorted

    bool flag(const VehicleId& id) const { return flagged.count(id) > 0; }
    bool empty() const noexcept { return flagged.empty(); }
};

inline WarningSet detect_collisions(std::span<const PredictedTrajectory> trajectories, double d_col,
                                    double headway_threshold, double slot_time = 0.0) {
    std::vector<Track> tracks;
    tracks.reserve(trajectories.size());
    for (const auto& t : trajectories) tracks.push_back({t.vehicle_id, t.points});
    WarningSet w;
    w.slot_time = slot_time;
    w.pair_events = detect_pairs(tracks, d_col, headway_threshold);
    for (const auto& e : w.pair_events) {
        w.flagged.insert(e.pair.first);
        w.flagged.insert(e.pair.second);
    }
    return w;
}

struct StepResult {
    WarningSet warnings;
    std::vector<PredictedTrajectory> predictions;
    DetectionResult detection;
};

/// One slot of the calibrated pipeline: record, detect losses, estimate
/// latency and calibrate each packet, predict, test pairs.
template <class Engine>
StepResult tccw_step(FogState& state, std::span<const PacketRecord> received, double e_k, Engine& rng) {
    StepResult r;
    record_step(state, received, e_k);
    r.detection = detect_losses(state, e_k);
    for (const auto& [id, rec] : state.current) {
        const double lat = estimate_latency(state.config, rng);
        const auto cal = calibrate_state(rec.packet, rec.receive_time, e_k, lat);
        r.predictions.push_back(predict_trajectory(id, cal, e_k, state.config));
    }
    r.warnings = detect_collisions(r.predictions, state.config.d_col, state.config.headway, e_k);
    return r;
}

/// Uncalibrated pipelines. FWC keeps the Record bookkeeping without loss
/// recovery; CBW keeps no state at all.
inline StepResult baseline_step(FogState& state, std::span<const PacketRecord> received, double e_k,
                                Algorithm mode) {
    if (mode == Algorithm::tccw) throw ConfigError("baseline_step needs FWC or CBW");
    StepResult r;
    std::map<VehicleId, PacketRecord> working;
    if (mode == Algorithm::fwc) {
        record_step(state, received, e_k);
        working = state.current;
    } else {
        for (const auto& rec : received) {
            auto [it, inserted] = working.try_emplace(rec.packet.vehicle_id, rec);
            if (!inserted && rec.packet.sensed_time > it->second.packet.sensed_time) it->second = rec;
        }
    }
    for (const auto& [id, rec] : working) {
        r.predictions.push_back(predict_trajectory(id, uncalibrated_state(rec.packet), e_k, state.config));
    }
    r.warnings = detect_collisions(r.predictions, state.config.d_col, state.config.headway, e_k);
    return r;
}

inline StepResult baseline_step(FogState& state, std::span<const PacketRecord> received, double e_k,
                                std::string_view mode) {
    return baseline_step(state, received, e_k, parse_algorithm(mode));
}

/// Dispatch on the algorithm.
template <class Engine>
StepResult step(Algorithm a, FogState& state, std::span<const PacketRecord> received, double e_k, Engine& rng) {
    return a == Algorithm::tccw ? tccw_step(state, received, e_k, rng) : baseline_step(state, received, e_k, a);
}

inline constexpr std::string_view kWarningLogHeader = "slot_time,vehicle_id,other_vehicle_id,meet_x,meet_y,headway";

/// One row per flagged (slot, vehicle); the triggering pair is the one with
/// the smallest headway.
inline void write_warning_rows(std::ostream& out, const WarningSet& w) {
    for (const auto& id : w.flagged) {
        const CollisionEvent* best = nullptr;
        for (const auto& e : w.pair_events) {
            if (e.pair.first != id && e.pair.second != id) continue;
            if (best == nullptr || e.headway < best->headway) best = &e;
        }
        if (best == nullptr) continue;
        const auto& other = best->pair.first == id ? best->pair.second : best->pair.first;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.6f,", w.slot_time);
        out << buf << id << ',' << other;
        std::snprintf(buf, sizeof buf, ",%.3f,%.3f,%.6f\n", best->location.x, best->location.y, best->headway);
        out << buf;
    }
}

} // namespace vfcw::fog
