#pragma once

// Slot-driven simulation: emission, channel, fog step, scoring, sweeps and
// file outputs.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vfcw/channel.hpp"
#include "vfcw/collision.hpp"
#include "vfcw/config.hpp"
#include "vfcw/error.hpp"
#include "vfcw/fog.hpp"
#include "vfcw/metrics.hpp"
#include "vfcw/random.hpp"
#include "vfcw/stable.hpp"
#include "vfcw/suite.hpp"
#include "vfcw/trajectory.hpp"

namespace vfcw::sim {

namespace fs = std::filesystem;

inline trajectory::Scenario build_scenario(const ScenarioSource& src) {
    trajectory::Scenario sc;
    switch (src.kind) {
    case ScenarioKind::suite:
        if (src.suite_name == "all") throw ConfigError("the pooled suite 'all' is only available to sweeps");
        sc = suite::scenario(src.suite_name);
        break;
    case ScenarioKind::synth: sc = trajectory::synth_scenario(src.spec, src.synth_seed); break;
    case ScenarioKind::file: {
        std::ifstream in(src.path);
        if (!in) throw ConfigError("cannot open scenario file: " + src.path);
        auto store = trajectory::load_trajectories(in, src.format);
        trajectory::derive_all(store);
        sc = trajectory::extract_scenario(store, src.fog, src.comm_range, src.t_start, src.duration,
                                          src.slot_period);
        break;
    }
    }
    sc.score_radius = src.score_radius;
    sc.validate();
    return sc;
}

inline channel::ChannelConfig resolve_channel(const RunConfig& c, double comm_range) {
    channel::ChannelConfig ch;
    const std::string& m = c.channel.model;
    if (m == "auto") {
        ch = channel::preset(c.algorithm == fog::Algorithm::cbw ? "cloud_lte" : "fog_dsrc");
    } else if (m == "fog_dsrc" || m == "cloud_lte") {
        ch = channel::preset(m);
    } else if (m == "stable") {
        ch.latency = channel::StableLatency{c.channel.params};
    } else if (m == "trace") {
        std::ifstream in(c.channel.trace_path);
        if (!in) throw ConfigError("cannot open latency trace: " + c.channel.trace_path);
        ch.latency = channel::TraceLatency{channel::load_latency_trace(in), c.channel.trace_wrap};
    } else if (m == "fixed") {
        ch.latency = channel::FixedLatency{c.channel.fixed_ms};
    } else {
        throw ConfigError("unknown channel model '" + m + "'");
    }
    ch.loss_rate = c.channel.loss_rate;
    ch.comm_range = comm_range;
    ch.validate();
    return ch;
}

/// Fog-side configuration. The latency model the fog believes in is the
/// channel's own: the stable parameters, a fit of the trace, or a point mass
/// at the fixed latency.
inline fog::FogConfig resolve_fog(const RunConfig& c, const trajectory::Scenario& sc,
                                  const channel::ChannelConfig& ch) {
    fog::FogConfig f;
    f.location = sc.fog_location;
    f.comm_range = sc.comm_range;
    f.tau = c.thresholds.tau;
    f.gamma = c.thresholds.gamma;
    f.headway = c.thresholds.headway;
    f.d_col = c.thresholds.d_col;
    f.predict_horizon = c.thresholds.predict_horizon;
    f.slot_period = sc.slot_period;
    bool point_mass = false;
    if (const auto* s = std::get_if<channel::StableLatency>(&ch.latency)) {
        f.latency_params = s->params;
    } else if (const auto* t = std::get_if<channel::TraceLatency>(&ch.latency)) {
        f.latency_params = stable::fit(t->samples_ms).params;
    } else if (const auto* x = std::get_if<channel::FixedLatency>(&ch.latency)) {
        f.latency_params = {2.0, 0.0, x->ms, 1e-9};
        point_mass = true;
    }
    if (c.estimator == "auto") {
        f.estimator = point_mass ? fog::LatencyEstimator::mean : fog::LatencyEstimator::random;
    } else {
        f.estimator = fog::parse_estimator(c.estimator);
    }
    f.validate();
    return f;
}

struct PacketCounts {
    std::int64_t sent = 0;
    std::int64_t delivered = 0;
    std::int64_t lost = 0;
    std::int64_t out_of_range = 0;
    std::int64_t recovered = 0;       ///< injections that stood in for a genuinely lost packet
    std::int64_t declared_losses = 0; ///< all injections, including merely late packets
    std::int64_t late_discarded = 0;  ///< delivered after the scenario end
    std::int64_t removed = 0;         ///< leave decisions
};

struct RunReport {
    json config;
    trajectory::ScenarioStats stats;
    std::vector<fog::WarningSet> warning_log; ///< non-empty slots only
    std::vector<CollisionEvent> expected;      ///< W_d, merged
    std::vector<CollisionEvent> predicted;     ///< W_p, merged and restricted to the scoring domain
    metrics::MatchResult match;
    metrics::Score score;
    PacketCounts packets;
    std::size_t raw_expected = 0;  ///< point-pair detections before merging
    std::size_t raw_predicted = 0;
    std::size_t flag_count = 0;    ///< flagged (slot, vehicle) records
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;     ///< not written to any file
    std::vector<std::string> notes;
};

inline double match_tolerance(const RunConfig& c) {
    return c.thresholds.match_tolerance >= 0.0 ? c.thresholds.match_tolerance : c.thresholds.predict_horizon;
}

/// Simulates one run over a prepared scenario.
inline RunReport run(const RunConfig& cfg, const trajectory::Scenario& sc) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.config = to_json(cfg);
    rep.seed = *cfg.seed;
    rep.stats = trajectory::scenario_stats(sc);
    if (sc.vehicles.empty()) rep.notes.push_back("scenario contains no vehicles");

    channel::Channel chan(resolve_channel(cfg, sc.comm_range));
    fog::FogState state(resolve_fog(cfg, sc, chan.config()));
    Rng channel_rng(derive_seed(*cfg.seed, "channel"));
    Rng fog_rng(derive_seed(*cfg.seed, "fog"));
    Rng jitter_rng(derive_seed(*cfg.seed, "jitter"));

    std::vector<channel::Delivery> pending;
    std::map<VehicleId, int> outstanding_losses;
    std::vector<CollisionEvent> raw_predicted;
    const int n_slots = sc.slot_count();

    for (int k = 0; k <= n_slots; ++k) {
        const double e_k = sc.slot_time(k);
        for (const auto& [id, pts] : sc.vehicles) {
            const double jit = cfg.emission_jitter > 0.0 ? uniform(jitter_rng, 0.0, cfg.emission_jitter) : 0.0;
            const double t_emit = e_k + jit;
            const auto st = trajectory::state_at(pts, t_emit);
            if (!st) continue;
            channel::StatusPacket pkt{id, t_emit, st->pos, st->vel, st->acc, st->heading};
            auto d = chan.transmit(pkt, st->pos, sc.fog_location, channel_rng);
            ++rep.packets.sent;
            switch (d.outcome) {
            case channel::Outcome::out_of_range: ++rep.packets.out_of_range; break;
            case channel::Outcome::lost:
                ++rep.packets.lost;
                ++outstanding_losses[id];
                break;
            case channel::Outcome::delivered:
                ++rep.packets.delivered;
                if (d.arrival_time > sc.t_end() + kTimeEps) {
                    ++rep.packets.late_discarded;
                } else {
                    pending.push_back(std::move(d));
                }
                break;
            }
        }

        // Slot k owns arrivals in (e_{k-1}, e_k].
        std::vector<fog::PacketRecord> received;
        auto split = std::stable_partition(pending.begin(), pending.end(), [&](const channel::Delivery& d) {
            return d.arrival_time <= e_k + kTimeEps;
        });
        for (auto it = pending.begin(); it != split; ++it) received.push_back({it->packet, it->arrival_time, false});
        pending.erase(pending.begin(), split);
        std::stable_sort(received.begin(), received.end(), [](const fog::PacketRecord& a, const fog::PacketRecord& b) {
            return a.receive_time < b.receive_time;
        });

        auto result = fog::step(cfg.algorithm, state, received, e_k, fog_rng);
        rep.packets.removed += static_cast<std::int64_t>(result.detection.removed.size());
        for (const auto& id : result.detection.recovered) {
            ++rep.packets.declared_losses;
            auto it = outstanding_losses.find(id);
            if (it != outstanding_losses.end() && it->second > 0) {
                ++rep.packets.recovered;
                --it->second;
            }
        }
        // A fresh delivery supersedes any loss still owed for that vehicle.
        for (const auto& r : received) outstanding_losses.erase(r.packet.vehicle_id);

        for (const auto& e : result.warnings.pair_events) {
            if (sc.in_score_domain(e.point_time_a, e.pos_a) && sc.in_score_domain(e.point_time_b, e.pos_b)) {
                raw_predicted.push_back(e);
            }
        }
        if (!result.warnings.empty()) {
            rep.flag_count += result.warnings.flagged.size();
            rep.warning_log.push_back(std::move(result.warnings));
        }
    }

    const auto truth_tracks = trajectory::ground_truth_tracks(sc);
    const auto raw_expected = detect_pairs(truth_tracks, cfg.thresholds.d_col, cfg.thresholds.headway);
    rep.raw_expected = raw_expected.size();
    rep.expected = merge_episodes(raw_expected, sc.slot_period);

    std::sort(raw_predicted.begin(), raw_predicted.end(), event_less);
    raw_predicted.erase(std::unique(raw_predicted.begin(), raw_predicted.end()), raw_predicted.end());
    rep.raw_predicted = raw_predicted.size();
    rep.predicted = merge_episodes(std::move(raw_predicted), sc.slot_period);

    rep.match = metrics::match_warnings(rep.expected, rep.predicted, match_tolerance(cfg));
    rep.score = metrics::score(rep.match);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline RunReport run(const RunConfig& cfg) {
    cfg.validate();
    return run(cfg, build_scenario(cfg.scenario));
}

// ---------------------------------------------------------------------------
// Output

inline std::string fmt_num(double v) { return trajectory::detail::format_double(v); }

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline json to_json(const CollisionEvent& e) {
    return {{"pair", {e.pair.first, e.pair.second}},
            {"point_time_a", e.point_time_a},
            {"point_time_b", e.point_time_b},
            {"location", {e.location.x, e.location.y}},
            {"headway", e.headway},
            {"start", e.start},
            {"end", e.end}};
}

inline json report_json(const RunReport& r) {
    json j;
    j["config"] = r.config;
    j["seed"] = r.seed;
    j["scenario_stats"] = {{"vehicle_count", r.stats.vehicle_count},
                           {"avg_speed_kmh", r.stats.avg_speed_kmh},
                           {"avg_accel", r.stats.avg_accel}};
    const auto& p = r.packets;
    j["packets"] = {{"sent", p.sent},
                    {"delivered", p.delivered},
                    {"lost", p.lost},
                    {"out_of_range", p.out_of_range},
                    {"recovered", p.recovered},
                    {"declared_losses", p.declared_losses},
                    {"late_discarded", p.late_discarded},
                    {"removed", p.removed}};
    j["match"] = {{"tp", r.match.true_positives}, {"fp", r.match.false_positives}, {"fn", r.match.false_negatives}};
    j["score"] = {{"precision", r.score.precision}, {"recall", r.score.recall}};
    j["auxiliary"] = {{"raw_expected_detections", r.raw_expected},
                      {"raw_predicted_detections", r.raw_predicted},
                      {"flagged_slot_vehicles", r.flag_count}};
    json ex = json::array(), pr = json::array();
    for (const auto& e : r.expected) ex.push_back(to_json(e));
    for (const auto& e : r.predicted) pr.push_back(to_json(e));
    j["expected_warnings"] = ex;
    j["predicted_warnings"] = pr;
    j["notes"] = r.notes;
    return j;
}

inline std::string warnings_csv(const RunReport& r) {
    std::ostringstream os;
    os << fog::kWarningLogHeader << '\n';
    for (const auto& w : r.warning_log) fog::write_warning_rows(os, w);
    return os.str();
}

inline constexpr std::string_view kResultsHeader = "axis,value,algorithm,tp,fp,fn,precision,recall,seed";

inline std::string results_row(std::string_view axis, std::string_view value, fog::Algorithm a, int tp, int fp,
                               int fn, double precision, double recall, std::uint64_t seed) {
    std::ostringstream os;
    os << axis << ',' << value << ',' << fog::to_string(a) << ',' << tp << ',' << fp << ',' << fn << ','
       << fmt_num(precision) << ',' << fmt_num(recall) << ',' << seed << '\n';
    return os.str();
}

/// report.json, warnings.csv and results.csv in `dir`.
inline void write_run_outputs(const RunReport& r, fs::path dir, fog::Algorithm a) {
    write_atomic(dir / "report.json", report_json(r).dump(2) + "\n");
    write_atomic(dir / "warnings.csv", warnings_csv(r));
    write_atomic(dir / "results.csv",
                 std::string(kResultsHeader) + "\n" +
                     results_row("run", "-", a, r.match.true_positives, r.match.false_positives,
                                 r.match.false_negatives, r.score.precision, r.score.recall, r.seed));
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Axis { headway, loss, scenario };

inline std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::headway: return "headway";
    case Axis::loss: return "loss";
    case Axis::scenario: return "scenario";
    }
    return "?";
}

struct AxisSpec {
    Axis axis = Axis::loss;
    std::vector<std::string> values; ///< canonical text of each value
};

/// Parses "name=v1,v2,...". Numbers are re-printed canonically so that "0.10"
/// and "0.1" name the same cell.
inline AxisSpec parse_axis(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("axis must look like name=v1,v2,...");
    const auto name = text.substr(0, eq);
    AxisSpec ax;
    if (name == "headway") {
        ax.axis = Axis::headway;
    } else if (name == "loss" || name == "loss_rate") {
        ax.axis = Axis::loss;
    } else if (name == "scenario") {
        ax.axis = Axis::scenario;
    } else {
        throw ConfigError("unknown axis '" + std::string(name) + "' (expected headway, loss or scenario)");
    }
    auto rest = text.substr(eq + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        auto tok = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        if (tok.empty()) continue;
        if (ax.axis == Axis::scenario) {
            if (tok != "all") suite::entry(tok);
            ax.values.emplace_back(tok);
            continue;
        }
        const auto v = trajectory::detail::parse_double(tok);
        if (!v || !std::isfinite(*v)) throw ConfigError("axis value '" + std::string(tok) + "' is not a number");
        if (ax.axis == Axis::loss && (*v < 0.0 || *v > 1.0)) throw ConfigError("loss values must lie in [0, 1]");
        if (ax.axis == Axis::headway && !(*v > 0.0)) throw ConfigError("headway values must be positive");
        ax.values.push_back(fmt_num(*v));
    }
    return ax;
}

inline RunConfig apply_axis(RunConfig c, Axis axis, const std::string& value) {
    switch (axis) {
    case Axis::headway: c.thresholds.headway = *trajectory::detail::parse_double(value); break;
    case Axis::loss: c.channel.loss_rate = *trajectory::detail::parse_double(value); break;
    case Axis::scenario:
        c.scenario.kind = ScenarioKind::suite;
        c.scenario.suite_name = value;
        break;
    }
    return c;
}

struct RepResult {
    int rep = 0;
    std::uint64_t seed = 0;
    int tp = 0, fp = 0, fn = 0;
    double precision = 1.0, recall = 1.0;
    PacketCounts packets;
    bool ok = true;
    std::string error;
};

struct Cell {
    std::string axis;
    std::string value;
    fog::Algorithm algorithm = fog::Algorithm::tccw;
    std::uint64_t seed = 0;
    std::vector<RepResult> reps;
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0;       ///< means over repetitions
    double precision_se = 0.0, recall_se = 0.0; ///< standard errors of those means
    bool ok = true;
    std::string error;
};

struct SweepResult {
    std::vector<Cell> cells;
};

inline std::uint64_t cell_seed(std::uint64_t master, Axis axis, const std::string& value, fog::Algorithm a) {
    return derive_seed(derive_seed(master, std::string(to_string(axis)) + "=" + value), fog::to_string(a));
}

namespace detail {

inline void add_counts(PacketCounts& into, const PacketCounts& p) {
    into.sent += p.sent;
    into.delivered += p.delivered;
    into.lost += p.lost;
    into.out_of_range += p.out_of_range;
    into.recovered += p.recovered;
    into.declared_losses += p.declared_losses;
    into.late_discarded += p.late_discarded;
    into.removed += p.removed;
}

inline void mean_se(const std::vector<double>& xs, double& mean, double& se) {
    const double n = static_cast<double>(xs.size());
    mean = se = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

} // namespace detail

/// One cell per (axis value, algorithm), each repeated with derived seeds.
/// When the scenario is the pooled suite ("all"), every repetition runs each
/// suite scenario and scores the pooled counts. Cells that fail are recorded,
/// not rethrown. Results do not depend on `jobs`.
inline SweepResult sweep(const RunConfig& base, const AxisSpec& axis, const std::vector<fog::Algorithm>& algorithms,
                         int repetitions, int jobs = 0) {
    if (!base.seed) throw ConfigError("config: 'seed' is required");
    if (repetitions < 1) throw ConfigError("repetitions must be positive");
    SweepResult out;
    for (const auto& v : axis.values) {
        for (auto a : algorithms) {
            Cell c;
            c.axis = std::string(to_string(axis.axis));
            c.value = v;
            c.algorithm = a;
            c.seed = cell_seed(*base.seed, axis.axis, v, a);
            c.reps.resize(repetitions);
            out.cells.push_back(std::move(c));
        }
    }
    if (out.cells.empty()) return out;

    // Scenarios are immutable and shared by every task.
    std::map<std::string, std::vector<std::shared_ptr<const trajectory::Scenario>>> scenarios;
    for (auto& c : out.cells) {
        RunConfig rc = apply_axis(base, axis.axis, c.value);
        rc.algorithm = c.algorithm;
        const std::string key = rc.scenario.kind == ScenarioKind::suite ? rc.scenario.suite_name : rc.scenario.label();
        if (scenarios.count(key)) continue;
        try {
            std::vector<std::shared_ptr<const trajectory::Scenario>> list;
            if (rc.scenario.kind == ScenarioKind::suite && rc.scenario.suite_name == "all") {
                for (const auto& n : suite::names()) {
                    ScenarioSource s = rc.scenario;
                    s.suite_name = n;
                    list.push_back(std::make_shared<const trajectory::Scenario>(build_scenario(s)));
                }
            } else {
                list.push_back(std::make_shared<const trajectory::Scenario>(build_scenario(rc.scenario)));
            }
            scenarios[key] = std::move(list);
        } catch (const Error& e) {
            scenarios[key] = {};
            c.ok = false;
            c.error = e.what();
        }
    }

    struct Task {
        std::size_t cell;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
        for (int r = 0; r < repetitions; ++r) tasks.push_back({i, r});
    }
    auto work = [&](const Task& t) {
        Cell& c = out.cells[t.cell];
        RepResult& rr = c.reps[t.rep];
        rr.rep = t.rep;
        rr.seed = derive_seed(c.seed, static_cast<std::uint64_t>(t.rep));
        try {
            RunConfig rc = apply_axis(base, axis.axis, c.value);
            rc.algorithm = c.algorithm;
            rc.seed = rr.seed;
            const std::string key =
                rc.scenario.kind == ScenarioKind::suite ? rc.scenario.suite_name : rc.scenario.label();
            const auto& list = scenarios.at(key);
            if (list.empty()) throw ConfigError("scenario could not be built");
            for (std::size_t s = 0; s < list.size(); ++s) {
                RunConfig sub = rc;
                if (list.size() > 1) sub.seed = derive_seed(rr.seed, static_cast<std::uint64_t>(s));
                const RunReport r = run(sub, *list[s]);
                rr.tp += r.match.true_positives;
                rr.fp += r.match.false_positives;
                rr.fn += r.match.false_negatives;
                detail::add_counts(rr.packets, r.packets);
            }
            const auto sc = metrics::score(rr.tp, rr.fp, rr.fn);
            rr.precision = sc.precision;
            rr.recall = sc.recall;
        } catch (const std::exception& e) {
            rr.ok = false;
            rr.error = e.what();
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_workers = static_cast<unsigned>(
        std::min<std::size_t>(jobs > 0 ? static_cast<unsigned>(jobs) : hw, tasks.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) work(tasks[i]);
        });
    }
    for (auto& th : pool) th.join();

    for (auto& c : out.cells) {
        std::vector<double> ps, rs;
        for (const auto& rr : c.reps) {
            if (!rr.ok) {
                c.ok = false;
                if (c.error.empty()) c.error = rr.error;
                continue;
            }
            c.tp += rr.tp;
            c.fp += rr.fp;
            c.fn += rr.fn;
            ps.push_back(rr.precision);
            rs.push_back(rr.recall);
        }
        detail::mean_se(ps, c.precision, c.precision_se);
        detail::mean_se(rs, c.recall, c.recall_se);
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& s) {
    std::string out(kResultsHeader);
    out += '\n';
    for (const auto& c : s.cells) {
        if (!c.ok) continue;
        out += results_row(c.axis, c.value, c.algorithm, c.tp, c.fp, c.fn, c.precision, c.recall, c.seed);
    }
    return out;
}

inline std::string sweep_runs_csv(const SweepResult& s) {
    std::ostringstream os;
    os << "axis,value,algorithm,rep,tp,fp,fn,precision,recall,sent,delivered,lost,out_of_range,recovered,seed\n";
    for (const auto& c : s.cells) {
        for (const auto& r : c.reps) {
            if (!r.ok) continue;
            os << c.axis << ',' << c.value << ',' << fog::to_string(c.algorithm) << ',' << r.rep << ',' << r.tp
               << ',' << r.fp << ',' << r.fn << ',' << fmt_num(r.precision) << ',' << fmt_num(r.recall) << ','
               << r.packets.sent << ',' << r.packets.delivered << ',' << r.packets.lost << ','
               << r.packets.out_of_range << ',' << r.packets.recovered << ',' << r.seed << '\n';
        }
    }
    return os.str();
}

inline std::string sweep_errors_csv(const SweepResult& s) {
    std::ostringstream os;
    os << "axis,value,algorithm,error\n";
    for (const auto& c : s.cells) {
        if (c.ok) continue;
        std::string msg = c.error;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        os << c.axis << ',' << c.value << ',' << fog::to_string(c.algorithm) << ",\"" << msg << "\"\n";
    }
    return os.str();
}

/// Two-panel line chart (precision, recall) over the axis values.
inline std::string sweep_svg(const SweepResult& s) {
    std::vector<std::string> values;
    std::vector<fog::Algorithm> algs;
    for (const auto& c : s.cells) {
        if (std::find(values.begin(), values.end(), c.value) == values.end()) values.push_back(c.value);
        if (std::find(algs.begin(), algs.end(), c.algorithm) == algs.end()) algs.push_back(c.algorithm);
    }
    const std::string axis = s.cells.empty() ? "" : s.cells.front().axis;
    const double W = 360, H = 240, L = 50, T = 30, PW = 280, PH = 170;
    const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a"};
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"11\">\n",
                  2 * W, H + 20);
    os << buf;
    for (int panel = 0; panel < 2; ++panel) {
        const double ox = panel * W;
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"#444\"/>\n",
                      ox + L, T, PW, PH);
        os << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"18\">%s vs %s</text>\n", ox + L,
                      panel == 0 ? "precision" : "recall", axis.c_str());
        os << buf;
        for (int g = 0; g <= 4; ++g) {
            const double y = T + PH - PH * g / 4.0;
            std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n",
                          ox + L - 4, y + 4, g / 4.0);
            os << buf;
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double x = ox + L + (values.size() > 1 ? PW * i / (values.size() - 1.0) : PW / 2);
            std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.0f\" text-anchor=\"middle\">%s</text>\n", x,
                          T + PH + 14, values[i].c_str());
            os << buf;
        }
        for (std::size_t ai = 0; ai < algs.size(); ++ai) {
            std::string pts;
            for (std::size_t i = 0; i < values.size(); ++i) {
                for (const auto& c : s.cells) {
                    if (c.algorithm != algs[ai] || c.value != values[i] || !c.ok) continue;
                    const double v = panel == 0 ? c.precision : c.recall;
                    const double x = ox + L + (values.size() > 1 ? PW * i / (values.size() - 1.0) : PW / 2);
                    std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x, T + PH - PH * v);
                    pts += buf;
                }
            }
            std::snprintf(buf, sizeof buf, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"",
                          colors[ai % 4]);
            os << buf << pts << "\"/>\n";
            std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"%.0f\" fill=\"%s\">%s</text>\n", ox + L + 6,
                          T + 14 + 13 * ai, colors[ai % 4], std::string(fog::to_string(algs[ai])).c_str());
            os << buf;
        }
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_sweep_outputs(const SweepResult& s, const fs::path& dir, bool svg) {
    write_atomic(dir / "sweep.csv", sweep_csv(s));
    write_atomic(dir / "sweep_runs.csv", sweep_runs_csv(s));
    write_atomic(dir / "sweep_errors.csv", sweep_errors_csv(s));
    if (svg && !s.cells.empty()) write_atomic(dir / ("sweep_" + s.cells.front().axis + ".svg"), sweep_svg(s));
}

} // namespace vfcw::sim
