#pragma once

// Run configuration and its JSON form.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vfcw/channel.hpp"
#include "vfcw/error.hpp"
#include "vfcw/fog.hpp"
#include "vfcw/stable.hpp"
#include "vfcw/trajectory.hpp"

namespace vfcw::sim {

using json = nlohmann::ordered_json;

enum class ScenarioKind { suite, synth, file };

struct ScenarioSource {
    ScenarioKind kind = ScenarioKind::suite;
    std::string suite_name = "s1"; ///< a suite entry, or "all" for the pooled suite (sweeps only)

    trajectory::SynthSpec spec;
    std::uint64_t synth_seed = 1;

    std::string path;
    trajectory::TrajectoryFormat format = trajectory::TrajectoryFormat::whitespace;
    Vec2 fog;
    double comm_range = 500.0;
    double t_start = 0.0;
    double duration = 100.0;
    double slot_period = 1.0;

    double score_radius = 0.0; ///< 0 means 0.8 * comm_range

    std::string label() const {
        switch (kind) {
        case ScenarioKind::suite: return suite_name;
        case ScenarioKind::synth: return spec.name;
        case ScenarioKind::file: return std::filesystem::path(path).filename().string();
        }
        return "?";
    }
};

struct ChannelSpec {
    std::string model = "auto"; ///< auto | fog_dsrc | cloud_lte | stable | trace | fixed
    stable::StableParams params = channel::kFogDsrcParams;
    std::string trace_path;
    bool trace_wrap = true;
    double fixed_ms = 0.0;
    double loss_rate = 0.0;
};

struct Thresholds {
    double tau = 10.0;
    double gamma = 0.2;
    double headway = 1.0;
    double d_col = 2.0;
    double predict_horizon = 5.0;
    double match_tolerance = -1.0; ///< negative means predict_horizon
};

struct SweepSpec {
    int repetitions = 20;
    std::vector<fog::Algorithm> algorithms{fog::Algorithm::tccw, fog::Algorithm::fwc, fog::Algorithm::cbw};
    int jobs = 0; ///< worker threads; 0 means hardware concurrency
    bool svg = true;
};

struct RunConfig {
    ScenarioSource scenario;
    ChannelSpec channel;
    fog::Algorithm algorithm = fog::Algorithm::tccw;
    Thresholds thresholds;
    std::string estimator = "auto"; ///< auto | random | mean
    double emission_jitter = 0.0;   ///< seconds, uniform in [0, jitter)
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    SweepSpec sweep;

    double slot_period() const {
        switch (scenario.kind) {
        case ScenarioKind::suite: return 1.0;
        case ScenarioKind::synth: return scenario.spec.slot_period;
        case ScenarioKind::file: return scenario.slot_period;
        }
        return 1.0;
    }

    void validate() const {
        if (!seed) throw ConfigError("config: 'seed' is required");
        if (scenario.kind == ScenarioKind::file && !std::filesystem::exists(scenario.path)) {
            throw ConfigError("scenario file not found: " + scenario.path);
        }
        if (scenario.kind == ScenarioKind::synth) scenario.spec.validate();
        if (channel.model == "trace" && !std::filesystem::exists(channel.trace_path)) {
            throw ConfigError("latency trace not found: " + channel.trace_path);
        }
        if (!(channel.loss_rate >= 0.0 && channel.loss_rate <= 1.0)) throw ConfigError("loss_rate must lie in [0, 1]");
        if (!(emission_jitter >= 0.0) || emission_jitter > slot_period()) {
            throw ConfigError("emission_jitter must lie in [0, slot_period]");
        }
        if (estimator != "auto") fog::parse_estimator(estimator);
        if (sweep.repetitions < 1) throw ConfigError("sweep repetitions must be positive");
        const Thresholds& t = thresholds;
        if (!(t.tau >= 0.0) || !(t.gamma >= 0.0) || !(t.headway > 0.0) || !(t.d_col > 0.0) ||
            !(t.predict_horizon > 0.0)) {
            throw ConfigError("thresholds out of range");
        }
    }
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + k + "'");
    }
}

template <class T>
void read(const json& j, std::string_view key, T& out, std::string_view where) {
    const auto it = j.find(std::string(key));
    if (it == j.end() || it->is_null()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(where) + "." + std::string(key) + ": wrong type");
    }
}

inline Vec2 read_vec(const json& j, std::string_view where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(std::string(where) + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::string resolve(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return p;
    const std::filesystem::path fp(p);
    return fp.is_absolute() || base.empty() ? p : (base / fp).lexically_normal().string();
}

} // namespace detail

inline trajectory::SynthSpec synth_spec_from_json(const json& j) {
    detail::check_keys(j,
                       {"name", "center", "comm_range", "t_start", "duration", "slot_period", "sample_period",
                        "spawn_distance", "approaches", "speed_min", "speed_max", "accel_min", "accel_max",
                        "first_arrival", "arrival_spacing", "spacing_jitter", "lane_offset"},
                       "synth");
    trajectory::SynthSpec s;
    detail::read(j, "name", s.name, "synth");
    if (j.contains("center")) s.center = detail::read_vec(j["center"], "synth.center");
    detail::read(j, "comm_range", s.comm_range, "synth");
    detail::read(j, "t_start", s.t_start, "synth");
    detail::read(j, "duration", s.duration, "synth");
    detail::read(j, "slot_period", s.slot_period, "synth");
    detail::read(j, "sample_period", s.sample_period, "synth");
    detail::read(j, "spawn_distance", s.spawn_distance, "synth");
    detail::read(j, "speed_min", s.speed_min, "synth");
    detail::read(j, "speed_max", s.speed_max, "synth");
    detail::read(j, "accel_min", s.accel_min, "synth");
    detail::read(j, "accel_max", s.accel_max, "synth");
    detail::read(j, "first_arrival", s.first_arrival, "synth");
    detail::read(j, "arrival_spacing", s.arrival_spacing, "synth");
    detail::read(j, "spacing_jitter", s.spacing_jitter, "synth");
    detail::read(j, "lane_offset", s.lane_offset, "synth");
    if (j.contains("approaches")) {
        if (!j["approaches"].is_array()) throw ConfigError("synth.approaches: expected a list");
        for (const auto& a : j["approaches"]) {
            detail::check_keys(a, {"heading_deg", "count", "arrival_times"}, "synth.approaches[]");
            trajectory::SynthApproach ap;
            detail::read(a, "heading_deg", ap.heading_deg, "synth.approaches[]");
            detail::read(a, "count", ap.count, "synth.approaches[]");
            detail::read(a, "arrival_times", ap.arrival_times, "synth.approaches[]");
            s.approaches.push_back(std::move(ap));
        }
    }
    s.validate();
    return s;
}

inline json to_json(const trajectory::SynthSpec& s) {
    json j;
    j["name"] = s.name;
    j["center"] = {s.center.x, s.center.y};
    j["comm_range"] = s.comm_range;
    j["t_start"] = s.t_start;
    j["duration"] = s.duration;
    j["slot_period"] = s.slot_period;
    j["sample_period"] = s.sample_period;
    j["spawn_distance"] = s.spawn_distance;
    json aps = json::array();
    for (const auto& a : s.approaches) {
        json ja{{"heading_deg", a.heading_deg}, {"count", a.count}};
        if (!a.arrival_times.empty()) ja["arrival_times"] = a.arrival_times;
        aps.push_back(ja);
    }
    j["approaches"] = aps;
    j["speed_min"] = s.speed_min;
    j["speed_max"] = s.speed_max;
    j["accel_min"] = s.accel_min;
    j["accel_max"] = s.accel_max;
    j["first_arrival"] = s.first_arrival;
    j["arrival_spacing"] = s.arrival_spacing;
    j["spacing_jitter"] = s.spacing_jitter;
    j["lane_offset"] = s.lane_offset;
    return j;
}

inline json to_json(const stable::StableParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"sigma", p.sigma}};
}

inline stable::StableParams stable_from_json(const json& j, std::string_view where) {
    detail::check_keys(j, {"alpha", "beta", "mu", "sigma"}, where);
    stable::StableParams p;
    detail::read(j, "alpha", p.alpha, where);
    detail::read(j, "beta", p.beta, where);
    detail::read(j, "mu", p.mu, where);
    detail::read(j, "sigma", p.sigma, where);
    if (!p.valid()) throw ConfigError(std::string(where) + ": invalid stable parameters");
    return p;
}

/// Parses a run config. Relative paths are resolved against `base_dir`.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
    detail::check_keys(j,
                       {"scenario", "channel", "algorithm", "thresholds", "fog", "emission_jitter", "seed",
                        "output", "sweep"},
                       "config");
    RunConfig c;
    if (j.contains("scenario")) {
        const json& s = j["scenario"];
        detail::check_keys(s,
                           {"suite", "synth", "seed", "file", "format", "fog", "comm_range", "t_start", "duration",
                            "slot_period", "score_radius"},
                           "scenario");
        const int kinds = int(s.contains("suite")) + int(s.contains("synth")) + int(s.contains("file"));
        if (kinds != 1) throw ConfigError("scenario: give exactly one of 'suite', 'synth' or 'file'");
        detail::read(s, "score_radius", c.scenario.score_radius, "scenario");
        if (s.contains("suite")) {
            c.scenario.kind = ScenarioKind::suite;
            detail::read(s, "suite", c.scenario.suite_name, "scenario");
        } else if (s.contains("synth")) {
            c.scenario.kind = ScenarioKind::synth;
            c.scenario.spec = synth_spec_from_json(s["synth"]);
            detail::read(s, "seed", c.scenario.synth_seed, "scenario");
        } else {
            c.scenario.kind = ScenarioKind::file;
            std::string path;
            detail::read(s, "file", path, "scenario");
            c.scenario.path = detail::resolve(path, base_dir);
            std::string fmt = "whitespace";
            detail::read(s, "format", fmt, "scenario");
            if (fmt == "whitespace") {
                c.scenario.format = trajectory::TrajectoryFormat::whitespace;
            } else if (fmt == "csv") {
                c.scenario.format = trajectory::TrajectoryFormat::csv;
            } else {
                throw ConfigError("scenario.format: expected 'whitespace' or 'csv'");
            }
            if (!s.contains("fog")) throw ConfigError("scenario.fog is required for file scenarios");
            c.scenario.fog = detail::read_vec(s["fog"], "scenario.fog");
            detail::read(s, "comm_range", c.scenario.comm_range, "scenario");
            detail::read(s, "t_start", c.scenario.t_start, "scenario");
            detail::read(s, "duration", c.scenario.duration, "scenario");
            detail::read(s, "slot_period", c.scenario.slot_period, "scenario");
        }
    }
    if (j.contains("channel")) {
        const json& ch = j["channel"];
        detail::check_keys(ch, {"model", "params", "trace", "wrap", "latency_ms", "loss_rate"}, "channel");
        detail::read(ch, "model", c.channel.model, "channel");
        if (ch.contains("params")) c.channel.params = stable_from_json(ch["params"], "channel.params");
        std::string trace;
        detail::read(ch, "trace", trace, "channel");
        c.channel.trace_path = detail::resolve(trace, base_dir);
        detail::read(ch, "wrap", c.channel.trace_wrap, "channel");
        detail::read(ch, "latency_ms", c.channel.fixed_ms, "channel");
        detail::read(ch, "loss_rate", c.channel.loss_rate, "channel");
        static constexpr std::string_view models[] = {"auto", "fog_dsrc", "cloud_lte", "stable", "trace", "fixed"};
        bool known = false;
        for (auto m : models) known = known || c.channel.model == m;
        if (!known) throw ConfigError("channel.model: unknown model '" + c.channel.model + "'");
    }
    if (j.contains("algorithm")) {
        std::string a;
        detail::read(j, "algorithm", a, "config");
        c.algorithm = fog::parse_algorithm(a);
    }
    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        detail::check_keys(t, {"tau", "gamma", "headway", "d_col", "predict_horizon", "match_tolerance"},
                           "thresholds");
        detail::read(t, "tau", c.thresholds.tau, "thresholds");
        detail::read(t, "gamma", c.thresholds.gamma, "thresholds");
        detail::read(t, "headway", c.thresholds.headway, "thresholds");
        detail::read(t, "d_col", c.thresholds.d_col, "thresholds");
        detail::read(t, "predict_horizon", c.thresholds.predict_horizon, "thresholds");
        detail::read(t, "match_tolerance", c.thresholds.match_tolerance, "thresholds");
    }
    if (j.contains("fog")) {
        detail::check_keys(j["fog"], {"estimator"}, "fog");
        detail::read(j["fog"], "estimator", c.estimator, "fog");
    }
    detail::read(j, "emission_jitter", c.emission_jitter, "config");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    std::string out;
    detail::read(j, "output", out, "config");
    c.output_dir = detail::resolve(out, base_dir);
    if (j.contains("sweep")) {
        const json& sw = j["sweep"];
        detail::check_keys(sw, {"repetitions", "algorithms", "jobs", "svg"}, "sweep");
        detail::read(sw, "repetitions", c.sweep.repetitions, "sweep");
        detail::read(sw, "jobs", c.sweep.jobs, "sweep");
        detail::read(sw, "svg", c.sweep.svg, "sweep");
        if (sw.contains("algorithms")) {
            std::vector<std::string> names;
            detail::read(sw, "algorithms", names, "sweep");
            c.sweep.algorithms.clear();
            for (const auto& n : names) c.sweep.algorithms.push_back(fog::parse_algorithm(n));
        }
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
    return config_from_json(j, file.parent_path());
}

/// Config echo for reports. Output paths are left out so that identical runs
/// written to different directories produce identical reports.
inline json to_json(const RunConfig& c) {
    json j;
    json s;
    switch (c.scenario.kind) {
    case ScenarioKind::suite: s["suite"] = c.scenario.suite_name; break;
    case ScenarioKind::synth:
        s["synth"] = to_json(c.scenario.spec);
        s["seed"] = c.scenario.synth_seed;
        break;
    case ScenarioKind::file:
        s["file"] = c.scenario.path;
        s["format"] = c.scenario.format == trajectory::TrajectoryFormat::csv ? "csv" : "whitespace";
        s["fog"] = {c.scenario.fog.x, c.scenario.fog.y};
        s["comm_range"] = c.scenario.comm_range;
        s["t_start"] = c.scenario.t_start;
        s["duration"] = c.scenario.duration;
        s["slot_period"] = c.scenario.slot_period;
        break;
    }
    s["score_radius"] = c.scenario.score_radius;
    j["scenario"] = s;
    json ch{{"model", c.channel.model}, {"loss_rate", c.channel.loss_rate}};
    if (c.channel.model == "stable") ch["params"] = to_json(c.channel.params);
    if (c.channel.model == "trace") {
        ch["trace"] = c.channel.trace_path;
        ch["wrap"] = c.channel.trace_wrap;
    }
    if (c.channel.model == "fixed") ch["latency_ms"] = c.channel.fixed_ms;
    j["channel"] = ch;
    j["algorithm"] = fog::to_string(c.algorithm);
    j["thresholds"] = {{"tau", c.thresholds.tau},
                       {"gamma", c.thresholds.gamma},
                       {"headway", c.thresholds.headway},
                       {"d_col", c.thresholds.d_col},
                       {"predict_horizon", c.thresholds.predict_horizon},
                       {"match_tolerance", c.thresholds.match_tolerance}};
    j["fog"] = {{"estimator", c.estimator}};
    j["emission_jitter"] = c.emission_jitter;
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

} // namespace vfcw::sim
