#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "vfcw/fog.hpp"
#include "vfcw/trajectory.hpp"

using namespace vfcw;
using namespace vfcw::fog;

namespace {

FogConfig base_config() {
    FogConfig c;
    c.location = {0, 0};
    c.comm_range = 500;
    c.tau = 5;
    c.gamma = 0.2;
    c.slot_period = 1.0;
    c.predict_horizon = 5.0;
    c.headway = 1.0;
    c.d_col = 2.0;
    return c;
}

PacketRecord rec(const std::string& id, double sensed, double received, Vec2 pos, Vec2 vel = {}, Vec2 acc = {}) {
    return {{id, sensed, pos, vel, acc, 0.0}, received, false};
}

std::set<VehiclePair> flagged_pairs(const WarningSet& w) {
    std::set<VehiclePair> s;
    for (const auto& e : w.pair_events) s.insert(e.pair);
    return s;
}

/// Exhaustive all-pairs check written without the library's pruning.
std::set<VehicleId> brute_flags(const std::vector<PredictedTrajectory>& trs, double d_col, double h,
                                std::vector<std::tuple<VehicleId, VehicleId, double, double>>* hits = nullptr) {
    std::set<VehicleId> out;
    for (std::size_t i = 0; i < trs.size(); ++i) {
        for (std::size_t j = 0; j < trs.size(); ++j) {
            if (i == j) continue;
            for (const auto& u : trs[i].points) {
                for (const auto& v : trs[j].points) {
                    const double dx = u.pos.x - v.pos.x, dy = u.pos.y - v.pos.y;
                    if (std::sqrt(dx * dx + dy * dy) < d_col && std::fabs(u.time - v.time) < h - 1e-9) {
                        out.insert(trs[i].vehicle_id);
                        if (hits && trs[i].vehicle_id < trs[j].vehicle_id) {
                            hits->emplace_back(trs[i].vehicle_id, trs[j].vehicle_id, u.time, v.time);
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<PredictedTrajectory> random_trajectories(Rng& rng, int n_vehicles, int n_points, double extent) {
    std::vector<PredictedTrajectory> out;
    for (int v = 0; v < n_vehicles; ++v) {
        PredictedTrajectory t{"v" + std::to_string(v), {}};
        Vec2 p{uniform(rng, -extent, extent), uniform(rng, -extent, extent)};
        const Vec2 vel{uniform(rng, -3, 3), uniform(rng, -3, 3)};
        for (int k = 1; k <= n_points; ++k) t.points.push_back({static_cast<double>(k), p + vel * k});
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

TEST(Record, EmptySlotKeepsIdSet) {
    FogState s(base_config());
    s.id_set.insert("v1");
    s.history["v1"].push_back(rec("v1", 0, 0.1, {0, 0}));
    const auto m = record_step(s, {}, 1.0);
    EXPECT_TRUE(m.empty());
    EXPECT_EQ(s.id_set, std::set<VehicleId>{"v1"});
}

TEST(Record, NewSenderJoinsBothSets) {
    FogState s(base_config());
    std::vector<PacketRecord> in{rec("v9", 0.0, 0.08, {10, 0})};
    const auto m = record_step(s, in, 1.0);
    EXPECT_TRUE(m.count("v9"));
    EXPECT_TRUE(s.id_set.count("v9"));
    EXPECT_EQ(s.history.at("v9").size(), 1u);
}

TEST(Record, LaterSensedPacketSupersedes) {
    FogState s(base_config());
    std::vector<PacketRecord> in{rec("v", 0.5, 0.95, {2, 0}), rec("v", 0.2, 0.6, {1, 0})};
    const auto m = record_step(s, in, 1.0);
    EXPECT_EQ(m.size(), 1u);
    EXPECT_EQ(s.current.at("v").packet.location.x, 2.0);
}

TEST(Record, HistoryIsBounded) {
    auto c = base_config();
    FogState s(c);
    for (int k = 0; k < 40; ++k) {
        std::vector<PacketRecord> in{rec("v", k, k + 0.05, {double(k), 0})};
        record_step(s, in, k + 1.0);
    }
    EXPECT_EQ(s.history.at("v").size(), c.history_capacity());
    EXPECT_EQ(c.history_capacity(), 7u); // ceil((1 + 0.2 + 5) / 1)
    EXPECT_EQ(s.latest("v")->packet.sensed_time, 39.0);
}

TEST(Record, SilentVehiclesExpire) {
    FogState s(base_config());
    std::vector<PacketRecord> in{rec("v", 0, 0.05, {10, 0})};
    record_step(s, in, 1.0);
    for (int k = 2; k <= 20; ++k) {
        record_step(s, {}, k);
        detect_losses(s, k);
    }
    EXPECT_FALSE(s.id_set.count("v"));
    EXPECT_FALSE(s.history.count("v"));
}

TEST(Detect, LeavingVehicleRemoved) {
    FogState s(base_config());
    s.id_set.insert("v1");
    s.history["v1"].push_back(rec("v1", 9, 9.1, {499, 0}));
    record_step(s, {}, 10.0);
    const auto r = detect_losses(s, 10.0);
    EXPECT_EQ(r.removed, std::vector<VehicleId>{"v1"});
    EXPECT_FALSE(s.id_set.count("v1"));
    EXPECT_TRUE(s.current.empty());
}

TEST(Detect, RecentPacketIsOnlyDelayed) {
    FogState s(base_config());
    s.id_set.insert("v1");
    s.history["v1"].push_back(rec("v1", 9.5, 9.6, {300, 0}));
    record_step(s, {}, 10.0);
    const auto r = detect_losses(s, 10.0);
    EXPECT_TRUE(r.removed.empty());
    EXPECT_TRUE(r.recovered.empty());
    EXPECT_TRUE(s.id_set.count("v1"));
}

TEST(Detect, StalePacketDeclaredLostAndInjected) {
    FogState s(base_config());
    s.id_set.insert("v1");
    s.history["v1"].push_back(rec("v1", 8.4, 8.5, {300, 0}));
    record_step(s, {}, 10.0);
    const auto r = detect_losses(s, 10.0);
    EXPECT_EQ(r.recovered, std::vector<VehicleId>{"v1"});
    ASSERT_TRUE(s.current.count("v1"));
    EXPECT_TRUE(s.current.at("v1").recovered);
    EXPECT_EQ(s.current.at("v1").receive_time, 8.5);
}

TEST(Detect, MissingHistoryIsInconsistent) {
    FogState s(base_config());
    s.id_set.insert("ghost");
    EXPECT_THROW(detect_losses(s, 1.0), Error);
}

TEST(Detect, SafetyProperty) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto c = base_config();
        c.tau = uniform(rng, 0, 50);
        FogState s(c);
        std::map<VehicleId, double> dist;
        for (int v = 0; v < 10; ++v) {
            const std::string id = "v" + std::to_string(v);
            const double d = uniform(rng, 0, 500);
            const double recv = uniform(rng, 5, 10);
            s.id_set.insert(id);
            s.history[id].push_back(rec(id, recv - 0.1, recv, {d, 0}));
            dist[id] = d;
        }
        record_step(s, {}, 10.0);
        const auto r = detect_losses(s, 10.0);
        for (const auto& id : r.removed) EXPECT_GE(dist[id], c.comm_range - c.tau);
        for (const auto& id : r.recovered) EXPECT_LT(dist[id], c.comm_range - c.tau);
        for (const auto& [id, d] : dist) {
            if (d < c.comm_range - c.tau) {
                EXPECT_TRUE(s.id_set.count(id)) << id;
            }
        }
    }
}

TEST(Calibrate, StationaryVehicleStaysPut) {
    StatusPacket p{"v", 0, {3, 4}, {}, {}, 0};
    const auto l = calibrate(p, 0.1, 5.0, 80.0);
    EXPECT_EQ(l, (Vec2{3, 4}));
}

TEST(Calibrate, WorkedExampleFortyKmh) {
    // 40 km/h, no acceleration, 1.3 s elapsed in total
    StatusPacket p{"v", 0, {0, 0}, {40.0 / 3.6, 0}, {}, 0};
    const auto l = calibrate(p, 0.0, 1.3, 0.0);
    EXPECT_NEAR(l.x, 14.444, 1e-3);
    EXPECT_NEAR(l.x, 14.0, 0.5);
}

TEST(Calibrate, ConstantAcceleration) {
    StatusPacket p{"v", 0, {0, 0}, {2, 0}, {2, 0}, 0};
    EXPECT_EQ(calibrate(p, 0.0, 2.0, 0.0), (Vec2{8, 0}));
    // e_ts = (e_k - receive) + latency
    EXPECT_EQ(calibrate(p, 1.5, 2.5, 1000.0), (Vec2{8, 0}));
    EXPECT_THROW(calibrate(p, 0, 1, -1), DomainError);
}

TEST(Latency, Estimator) {
    auto c = base_config();
    Rng a(5), b(5);
    EXPECT_EQ(estimate_latency(c, a), estimate_latency(c, b));

    Rng rng(6);
    double s = 0;
    for (int i = 0; i < 100'000; ++i) s += estimate_latency(c, rng);
    EXPECT_NEAR(s / 100'000, c.latency_params.mu, 2.0);

    c.latency_params = {1.77395, 1.0, 77.0, 1e-6};
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(estimate_latency(c, rng), 77.0, 1e-3);

    c.estimator = LatencyEstimator::mean;
    EXPECT_EQ(estimate_latency(c, rng), 77.0);
}

TEST(Predict, Examples) {
    auto c = base_config();
    c.predict_horizon = 3.0;
    const auto still = predict_trajectory("v", {{5, 5}, {}, {}, 0}, 10.0, c);
    ASSERT_EQ(still.points.size(), 3u);
    for (const auto& p : still.points) EXPECT_EQ(p.pos, (Vec2{5, 5}));

    c.predict_horizon = 2.0;
    const auto mv = predict_trajectory("v", {{0, 0}, {5, 0}, {}, 0}, 10.0, c);
    ASSERT_EQ(mv.points.size(), 2u);
    EXPECT_EQ(mv.points[0].pos, (Vec2{5, 0}));
    EXPECT_EQ(mv.points[1].pos, (Vec2{10, 0}));
    EXPECT_EQ(mv.points[0].time, 11.0);
    EXPECT_EQ(mv.points[1].time - mv.points[0].time, c.slot_period);

    c.predict_horizon = 2.5;
    EXPECT_EQ(predict_trajectory("v", {}, 0.0, c).points.size(), 3u);
}

TEST(Collisions, SameCellHalfSecondApart) {
    std::vector<PredictedTrajectory> t{{"a", {{10.0, {0, 0}}, {11.0, {10, 0}}}},
                                       {"b", {{10.5, {0.5, 0}}, {11.5, {0, 10}}}}};
    const auto w = detect_collisions(t, 2.0, 1.0, 9.0);
    EXPECT_EQ(w.flagged, (std::set<VehicleId>{"a", "b"}));
    ASSERT_EQ(w.pair_events.size(), 1u);
    EXPECT_DOUBLE_EQ(w.pair_events[0].headway, 0.5);
    EXPECT_TRUE(detect_collisions(t, 2.0, 0.3).empty());
    EXPECT_TRUE(detect_collisions({}, 2.0, 1.0).empty());
}

TEST(Collisions, MatchesBruteForce) {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const auto trs = random_trajectories(rng, 5, 6, 15.0);
        const double d = uniform(rng, 0.5, 4.0);
        const double h = uniform(rng, 0.5, 4.0);
        std::vector<std::tuple<VehicleId, VehicleId, double, double>> hits;
        const auto ref = brute_flags(trs, d, h, &hits);
        const auto w = detect_collisions(trs, d, h);
        EXPECT_EQ(w.flagged, ref);
        ASSERT_EQ(w.pair_events.size(), hits.size());
        std::sort(hits.begin(), hits.end());
        std::vector<std::tuple<VehicleId, VehicleId, double, double>> got;
        for (const auto& e : w.pair_events) got.emplace_back(e.pair.first, e.pair.second, e.point_time_a, e.point_time_b);
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, hits);
    }
}

TEST(Collisions, FlagSymmetry) {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto w = detect_collisions(random_trajectories(rng, 8, 5, 10.0), 2.0, 2.0);
        for (const auto& e : w.pair_events) {
            EXPECT_TRUE(w.flag(e.pair.first));
            EXPECT_TRUE(w.flag(e.pair.second));
        }
        for (const auto& id : w.flagged) {
            EXPECT_TRUE(std::any_of(w.pair_events.begin(), w.pair_events.end(),
                                    [&](const CollisionEvent& e) { return e.pair.first == id || e.pair.second == id; }));
        }
    }
}

TEST(Collisions, MonotoneInThresholds) {
    Rng rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const auto trs = random_trajectories(rng, 6, 6, 12.0);
        std::set<VehiclePair> prev;
        for (double h : {0.5, 1.0, 2.0, 3.0, 5.0}) {
            const auto cur = flagged_pairs(detect_collisions(trs, 2.0, h));
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            prev = cur;
        }
        prev.clear();
        for (double d : {0.5, 1.0, 2.0, 4.0}) {
            const auto cur = flagged_pairs(detect_collisions(trs, d, 1.5));
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            prev = cur;
        }
    }
}

TEST(Step, TrivialCases) {
    FogState s(base_config());
    Rng rng(1);
    EXPECT_TRUE(tccw_step(s, {}, 1.0, rng).warnings.empty());
    std::vector<PacketRecord> one{rec("solo", 1.0, 1.0, {0, 0}, {5, 0})};
    EXPECT_TRUE(tccw_step(s, one, 2.0, rng).warnings.empty());
}

TEST(Step, UnknownBaselineMode) {
    FogState s(base_config());
    EXPECT_THROW(baseline_step(s, {}, 1.0, "XYZ"), ConfigError);
    EXPECT_THROW(baseline_step(s, {}, 1.0, Algorithm::tccw), ConfigError);
}

namespace {

/// Feeds exact, instantly delivered packets from a scenario through one
/// algorithm and returns the merged, domain-restricted detections.
std::vector<CollisionEvent> drive_perfect(const trajectory::Scenario& sc, Algorithm a,
                                          std::vector<WarningSet>* log = nullptr) {
    auto c = base_config();
    c.location = sc.fog_location;
    c.slot_period = sc.slot_period;
    c.latency_params = {2.0, 0.0, 0.0, 1e-9};
    c.estimator = LatencyEstimator::mean;
    FogState s(c);
    Rng rng(1);
    std::vector<CollisionEvent> raw;
    for (int k = 0; k <= sc.slot_count(); ++k) {
        const double e = sc.slot_time(k);
        std::vector<PacketRecord> in;
        for (const auto& [id, pts] : sc.vehicles) {
            const auto st = trajectory::state_at(pts, e);
            if (st && sc.in_coverage(st->pos)) in.push_back(rec(id, e, e, st->pos, st->vel, st->acc));
        }
        auto r = step(a, s, in, e, rng);
        for (const auto& ev : r.warnings.pair_events) {
            if (sc.in_score_domain(ev.point_time_a, ev.pos_a) && sc.in_score_domain(ev.point_time_b, ev.pos_b)) {
                raw.push_back(ev);
            }
        }
        if (log) log->push_back(r.warnings);
    }
    return merge_episodes(raw, sc.slot_period);
}

void expect_same_episodes(const std::vector<CollisionEvent>& got, const std::vector<CollisionEvent>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].pair, want[i].pair);
        EXPECT_NEAR(got[i].start, want[i].start, 1e-9);
        EXPECT_NEAR(got[i].end, want[i].end, 1e-9);
        EXPECT_NEAR(got[i].headway, want[i].headway, 1e-9);
    }
}

} // namespace

TEST(Step, PerfectChannelEquivalence) {
    trajectory::SynthSpec spec;
    spec.duration = 40.0;
    spec.slot_period = 0.5;
    spec.speed_min = spec.speed_max = 10.0;
    spec.lane_offset = 0.0;
    spec.approaches = {{0.0, 1, {10.0}}, {90.0, 1, {10.5}}};
    const auto sc = trajectory::synth_scenario(spec, 1);
    const auto truth = trajectory::expected_warnings(sc, 2.0, 1.0);
    ASSERT_EQ(truth.size(), 1u);
    expect_same_episodes(drive_perfect(sc, Algorithm::tccw), truth);
}

TEST(Step, AllAlgorithmsAgreeWithoutLatencyOrLoss) {
    trajectory::SynthSpec spec;
    spec.duration = 60.0;
    spec.approaches = {{0.0, 4, {}}, {90.0, 4, {}}, {180.0, 3, {}}, {270.0, 3, {}}};
    spec.accel_min = -0.3;
    spec.accel_max = 0.3;
    const auto sc = trajectory::synth_scenario(spec, 5);
    std::vector<WarningSet> lt, lf, lc;
    drive_perfect(sc, Algorithm::tccw, &lt);
    drive_perfect(sc, Algorithm::fwc, &lf);
    drive_perfect(sc, Algorithm::cbw, &lc);
    ASSERT_EQ(lt.size(), lf.size());
    for (std::size_t i = 0; i < lt.size(); ++i) {
        EXPECT_EQ(lt[i].flagged, lf[i].flagged);
        EXPECT_EQ(lt[i].flagged, lc[i].flagged);
        EXPECT_EQ(lt[i].pair_events, lf[i].pair_events);
    }
    expect_same_episodes(drive_perfect(sc, Algorithm::tccw), trajectory::expected_warnings(sc, 2.0, 1.0));
}

TEST(Step, RecoveryRestoresDroppedVehicle) {
    // a: eastbound through the origin at t=10; b: northbound through it at t=11.
    // Packets take 0.1 s, so each slot processes the previous slot's packets.
    auto c = base_config();
    c.headway = 1.5;
    c.latency_params = {2.0, 0.0, 100.0, 1e-9};
    c.estimator = LatencyEstimator::mean;
    const auto pkt = [](const std::string& id, double t) {
        const Vec2 pos = id == "a" ? Vec2{10.0 * (t - 10.0), 0} : Vec2{0, 10.0 * (t - 11.0)};
        const Vec2 vel = id == "a" ? Vec2{10, 0} : Vec2{0, 10};
        return rec(id, t, t + 0.1, pos, vel);
    };
    FogState tccw(c), fwc(c);
    Rng rng(1);
    WarningSet wt, wf;
    for (int k = 1; k <= 7; ++k) {
        std::vector<PacketRecord> in;
        const double sent = k - 1.0;
        if (k > 1) {
            if (sent != 6.0) in.push_back(pkt("a", sent)); // a's slot-6 packet is lost
            in.push_back(pkt("b", sent));
        }
        wt = tccw_step(tccw, in, k, rng).warnings;
        wf = baseline_step(fwc, in, k, Algorithm::fwc).warnings;
    }
    EXPECT_TRUE(wt.flag("a"));
    EXPECT_TRUE(wt.flag("b"));
    EXPECT_FALSE(wf.flag("a"));
    EXPECT_FALSE(wf.flag("b"));
}

TEST(Step, DeterministicSequence) {
    trajectory::SynthSpec spec;
    spec.approaches = {{0.0, 5, {}}, {90.0, 5, {}}};
    const auto sc = trajectory::synth_scenario(spec, 8);
    auto run_once = [&] {
        FogState s(base_config());
        Rng rng(99);
        std::ostringstream os;
        for (int k = 0; k <= sc.slot_count(); ++k) {
            const double e = sc.slot_time(k);
            std::vector<PacketRecord> in;
            for (const auto& [id, pts] : sc.vehicles) {
                const auto st = trajectory::state_at(pts, e);
                if (st) in.push_back(rec(id, e, e + 0.05, st->pos, st->vel, st->acc));
            }
            write_warning_rows(os, tccw_step(s, in, e + 1.0, rng).warnings);
        }
        return os.str();
    };
    EXPECT_EQ(run_once(), run_once());
}

TEST(WarningLog, RowFormat) {
    std::vector<PredictedTrajectory> t{{"a", {{10.0, {0, 0}}}}, {"b", {{10.5, {0.5, 0}}}}};
    const auto w = detect_collisions(t, 2.0, 1.0, 9.0);
    std::ostringstream os;
    write_warning_rows(os, w);
    EXPECT_EQ(os.str(), "9.000000,a,b,0.250,0.000,0.500000\n9.000000,b,a,0.250,0.000,0.500000\n");
}
