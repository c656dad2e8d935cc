// vfcw command-line driver: fit, sample, gen, stats, run, sweep.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfcw/vfcw.hpp"

namespace fs = std::filesystem;
using namespace vfcw;
using sim::json;

namespace {

std::vector<double> read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    return channel::load_latency_trace(in);
}

int cmd_fit(const std::string& trace, const std::string& out, const stable::FitConfig& cfg) {
    const auto xs = read_trace(trace);
    const auto rep = stable::fit(xs, cfg);
    json j{{"samples", xs.size()},
           {"alpha", rep.params.alpha},
           {"beta", rep.params.beta},
           {"mu", rep.params.mu},
           {"sigma", rep.params.sigma},
           {"iterations", rep.iterations_used},
           {"converged", rep.converged},
           {"residual_alpha_sigma", rep.residual_alpha_sigma},
           {"residual_beta_mu", rep.residual_beta_mu},
           {"beta_unidentified", rep.beta_unidentified},
           {"alpha_nudged", rep.alpha_nudged}};
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out.empty()) sim::write_atomic(out, text);
    return 0;
}

int cmd_sample(const stable::StableParams& p, std::size_t n, std::uint64_t seed, bool nonnegative,
               const std::string& out) {
    p.validate();
    Rng rng(seed);
    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = nonnegative ? channel::sample_nonnegative(p, rng) : stable::sample(p, rng);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f\n", x);
        os << buf;
    }
    if (out.empty()) {
        std::cout << os.str();
    } else {
        sim::write_atomic(out, os.str());
        std::cerr << "wrote " << n << " samples to " << out << "\n";
    }
    return 0;
}

void print_stats(const trajectory::Scenario& sc) {
    const auto st = trajectory::scenario_stats(sc);
    json j{{"vehicle_count", st.vehicle_count},
           {"avg_speed_kmh", st.avg_speed_kmh},
           {"avg_accel", st.avg_accel},
           {"fog", {sc.fog_location.x, sc.fog_location.y}},
           {"comm_range", sc.comm_range},
           {"t_start", sc.t_start},
           {"duration", sc.duration},
           {"slot_period", sc.slot_period}};
    std::cout << j.dump(2) << "\n";
}

int cmd_gen(const std::string& spec_path, const std::string& suite_name, std::uint64_t seed, bool seed_given,
            const std::string& out) {
    trajectory::Scenario sc;
    if (!suite_name.empty()) {
        sc = suite::scenario(suite_name);
    } else {
        if (spec_path.empty()) throw ConfigError("gen: give a spec file or --suite");
        if (!seed_given) throw ConfigError("gen: --seed is required with a spec file");
        std::ifstream in(spec_path);
        if (!in) throw ConfigError("cannot open spec file: " + spec_path);
        json j;
        try {
            j = json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(spec_path + ": " + e.what());
        }
        sc = trajectory::synth_scenario(sim::synth_spec_from_json(j), seed);
    }
    std::ostringstream os;
    trajectory::write_trajectories(os, sc.vehicles);
    if (out.empty()) {
        std::cout << os.str();
    } else {
        sim::write_atomic(out, os.str());
        print_stats(sc);
    }
    return 0;
}

int cmd_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.contains("scenario")) j = json{{"scenario", j}};
    const auto cfg = sim::config_from_json(j, fs::path(path).parent_path());
    print_stats(sim::build_scenario(cfg.scenario));
    return 0;
}

int cmd_run(const std::string& path, std::string out) {
    auto cfg = sim::load_config(path);
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) throw ConfigError("run: no output directory (config 'output' or --out)");
    const auto rep = sim::run(cfg);
    sim::write_run_outputs(rep, cfg.output_dir, cfg.algorithm);
    const auto& p = rep.packets;
    std::printf("%s on %s: precision %.4f recall %.4f (tp %d fp %d fn %d)\n",
                std::string(fog::to_string(cfg.algorithm)).c_str(), cfg.scenario.label().c_str(),
                rep.score.precision, rep.score.recall, rep.match.true_positives, rep.match.false_positives,
                rep.match.false_negatives);
    std::printf("packets: sent %lld delivered %lld lost %lld out_of_range %lld recovered %lld\n",
                static_cast<long long>(p.sent), static_cast<long long>(p.delivered), static_cast<long long>(p.lost),
                static_cast<long long>(p.out_of_range), static_cast<long long>(p.recovered));
    for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
    std::printf("outputs in %s (%.3f s)\n", cfg.output_dir.c_str(), rep.wall_seconds);
    return 0;
}

int cmd_sweep(const std::string& path, const std::string& axis_text, const std::string& algs, int reps, int jobs,
              bool no_svg, std::string out) {
    auto cfg = sim::load_config(path);
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) throw ConfigError("sweep: no output directory (config 'output' or --out)");
    if (!cfg.seed) throw ConfigError("config: 'seed' is required");
    const auto axis = sim::parse_axis(axis_text);
    std::vector<fog::Algorithm> algorithms = cfg.sweep.algorithms;
    if (!algs.empty()) {
        algorithms.clear();
        std::stringstream ss(algs);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) algorithms.push_back(fog::parse_algorithm(tok));
        }
    }
    const int r = reps > 0 ? reps : cfg.sweep.repetitions;
    const int j = jobs > 0 ? jobs : cfg.sweep.jobs;
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = sim::sweep(cfg, axis, algorithms, r, j);
    sim::write_sweep_outputs(res, cfg.output_dir, cfg.sweep.svg && !no_svg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-9s %-8s %-5s %9s %9s\n", "axis", "value", "alg", "precision", "recall");
    int failed = 0;
    for (const auto& c : res.cells) {
        if (!c.ok) {
            ++failed;
            std::printf("%-9s %-8s %-5s failed: %s\n", c.axis.c_str(), c.value.c_str(),
                        std::string(fog::to_string(c.algorithm)).c_str(), c.error.c_str());
            continue;
        }
        std::printf("%-9s %-8s %-5s %9.4f %9.4f\n", c.axis.c_str(), c.value.c_str(),
                    std::string(fog::to_string(c.algorithm)).c_str(), c.precision, c.recall);
    }
    std::printf("%zu cells x %d repetitions, %d failed, outputs in %s (%.2f s)\n", res.cells.size(), r, failed,
                cfg.output_dir.c_str(), secs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fog-node collision warning simulator"};
    app.require_subcommand(1);

    std::string trace, out;
    stable::FitConfig fit_cfg;
    auto* fit = app.add_subcommand("fit", "Fit stable parameters to a latency trace (ms, one per line)");
    fit->add_option("trace", trace, "trace file")->required();
    fit->add_option("-o,--out", out, "also write the JSON result here");
    fit->add_option("--max-iterations", fit_cfg.max_iterations, "iteration cap");
    fit->add_option("--tol", fit_cfg.convergence_tol, "convergence tolerance");

    stable::StableParams sp = channel::kFogDsrcParams;
    std::size_t n = 1804;
    std::uint64_t seed = 0;
    bool allow_negative = false;
    auto* sample = app.add_subcommand("sample", "Draw stable variates, one per line");
    sample->add_option("--alpha", sp.alpha);
    sample->add_option("--beta", sp.beta);
    sample->add_option("--mu", sp.mu);
    sample->add_option("--sigma", sp.sigma);
    sample->add_option("-n,--count", n, "number of draws");
    sample->add_option("--seed", seed, "rng seed")->required();
    sample->add_flag("--allow-negative", allow_negative, "keep negative draws");
    sample->add_option("-o,--out", out, "output file (default stdout)");

    std::string spec, suite_name;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario as a trajectory file");
    gen->add_option("spec", spec, "synthetic spec (JSON)");
    gen->add_option("--suite", suite_name, "bundled suite scenario instead of a spec");
    auto* gen_seed = gen->add_option("--seed", seed, "rng seed");
    gen->add_option("-o,--out", out, "output trajectory file (default stdout)");

    std::string scen;
    auto* stats = app.add_subcommand("stats", "Vehicle count, mean speed and mean acceleration of a scenario");
    stats->add_option("scenario", scen, "scenario or run config (JSON)")->required();

    std::string cfg_path;
    auto* run = app.add_subcommand("run", "Simulate one configuration");
    run->add_option("config", cfg_path, "run config (JSON)")->required();
    run->add_option("--out", out, "output directory (overrides the config)");

    std::string axis, algs;
    int reps = 0, jobs = 0;
    bool no_svg = false;
    auto* sweep = app.add_subcommand("sweep", "Sweep one axis across algorithms");
    sweep->add_option("config", cfg_path, "base run config (JSON)")->required();
    sweep->add_option("--axis", axis, "headway=1,2,3 | loss=0,0.03 | scenario=s1,s2")->required();
    sweep->add_option("--algorithms", algs, "comma-separated subset of TCCW,FWC,CBW");
    sweep->add_option("--reps", reps, "repetitions per cell");
    sweep->add_option("--jobs", jobs, "worker threads");
    sweep->add_flag("--no-svg", no_svg, "skip the chart");
    sweep->add_option("--out", out, "output directory (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return cmd_fit(trace, out, fit_cfg);
        if (*sample) return cmd_sample(sp, n, seed, !allow_negative, out);
        if (*gen) return cmd_gen(spec, suite_name, seed, gen_seed->count() > 0, out);
        if (*stats) return cmd_stats(scen);
        if (*run) return cmd_run(cfg_path, out);
        if (*sweep) return cmd_sweep(cfg_path, axis, algs, reps, jobs, no_svg, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
