#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "vfcw/sim.hpp"

using namespace vfcw;
using namespace vfcw::sim;
namespace fs = std::filesystem;

namespace {

RunConfig crossing() { return load_config(VFCW_DATA_DIR "/configs/crossing.json"); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("vfcw_test_" + name);
    fs::remove_all(p);
    return p;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Run, PerfectChannelCrossing) {
    const auto r = run(crossing());
    EXPECT_EQ(r.match.true_positives, 1);
    EXPECT_EQ(r.score.precision, 1.0);
    EXPECT_EQ(r.score.recall, 1.0);
    EXPECT_GT(r.flag_count, 0u);
}

TEST(Run, TotalLossGivesZeroRecall) {
    auto c = crossing();
    c.channel.loss_rate = 1.0;
    const auto r = run(c);
    EXPECT_EQ(r.packets.delivered, 0);
    EXPECT_EQ(r.match.true_positives, 0);
    EXPECT_EQ(r.score.recall, 0.0);
    EXPECT_TRUE(r.predicted.empty());
}

TEST(Run, EmptyScenarioIsVacuous) {
    auto c = crossing();
    c.scenario.spec.approaches.clear();
    const auto r = run(c);
    EXPECT_EQ(r.score.precision, 1.0);
    EXPECT_EQ(r.score.recall, 1.0);
    ASSERT_FALSE(r.notes.empty());
}

TEST(Run, ByteIdenticalOutputs) {
    auto c = load_config(VFCW_DATA_DIR "/configs/run_tccw.json");
    const auto a = scratch("det_a"), b = scratch("det_b");
    write_run_outputs(run(c), a, c.algorithm);
    write_run_outputs(run(c), b, c.algorithm);
    for (const char* f : {"report.json", "warnings.csv", "results.csv"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
}

TEST(Run, SeedChangesNoisyOutcome) {
    auto c = load_config(VFCW_DATA_DIR "/configs/run_tccw.json");
    const auto a = run(c);
    c.seed = *c.seed + 1;
    const auto b = run(c);
    EXPECT_NE(report_json(a).dump(), report_json(b).dump());
}

TEST(Run, PacketConservation) {
    for (const char* s : {"s1", "s4"}) {
        for (auto alg : {fog::Algorithm::tccw, fog::Algorithm::fwc, fog::Algorithm::cbw}) {
            RunConfig c;
            c.scenario.suite_name = s;
            c.algorithm = alg;
            c.channel.loss_rate = 0.06;
            c.emission_jitter = 1.0;
            c.seed = 3;
            const auto p = run(c).packets;
            EXPECT_EQ(p.delivered + p.lost + p.out_of_range, p.sent);
            EXPECT_LE(p.recovered, p.lost);
            EXPECT_LE(p.recovered, p.declared_losses);
            EXPECT_GT(p.lost, 0);
            if (alg == fog::Algorithm::tccw) {
                EXPECT_GT(p.recovered, 0);
            }
        }
    }
}

TEST(Run, FileScenarioMatchesGenerator) {
    const auto spec = load_config(VFCW_DATA_DIR "/configs/crossing.json");
    const auto sc = build_scenario(spec.scenario);
    const auto dir = scratch("file_scn");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "traj.txt");
        trajectory::write_trajectories(out, sc.vehicles);
    }
    auto c = spec;
    c.scenario.kind = ScenarioKind::file;
    c.scenario.path = (dir / "traj.txt").string();
    c.scenario.fog = sc.fog_location;
    c.scenario.comm_range = sc.comm_range;
    c.scenario.t_start = sc.t_start;
    c.scenario.duration = sc.duration;
    c.scenario.slot_period = sc.slot_period;
    const auto r = run(c);
    EXPECT_EQ(r.match.true_positives, 1);
    EXPECT_EQ(r.score.precision, 1.0);
}

TEST(Config, Errors) {
    auto c = crossing();
    c.seed.reset();
    EXPECT_THROW(c.validate(), ConfigError);

    EXPECT_THROW(load_config("/nonexistent/missing.cfg"), ConfigError);
    try {
        load_config("/nonexistent/missing.cfg");
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("missing.cfg"), std::string::npos);
    }

    EXPECT_THROW(config_from_json(json::parse(R"({"scenario": {"suite": "s1"}, "sede": 1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"scenario": {"suite": "s1", "synth": {}}})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"algorithm": "XYZ"})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"channel": {"model": "carrier_pigeon"}})")), ConfigError);

    auto f = config_from_json(json::parse(R"({"scenario": {"file": "nope.txt", "fog": [0, 0]}, "seed": 1})"));
    EXPECT_THROW(f.validate(), ConfigError);

    auto j = crossing();
    j.emission_jitter = 2.0; // longer than the slot
    EXPECT_THROW(j.validate(), ConfigError);
}

TEST(Config, EchoOmitsOutputDirectory) {
    auto c = crossing();
    const auto a = to_json(c).dump();
    c.output_dir = "/somewhere/else";
    EXPECT_EQ(to_json(c).dump(), a);
}

TEST(Axis, Parse) {
    const auto a = parse_axis("loss=0,0.030,0.06");
    EXPECT_EQ(a.axis, Axis::loss);
    EXPECT_EQ(a.values, (std::vector<std::string>{"0", "0.03", "0.06"}));
    EXPECT_TRUE(parse_axis("headway=").values.empty());
    EXPECT_EQ(parse_axis("scenario=s1,all").values.size(), 2u);
    EXPECT_THROW(parse_axis("speed=1"), ConfigError);
    EXPECT_THROW(parse_axis("loss"), ConfigError);
    EXPECT_THROW(parse_axis("loss=0,1.5"), ConfigError);
    EXPECT_THROW(parse_axis("headway=0"), ConfigError);
    EXPECT_THROW(parse_axis("headway=abc"), ConfigError);
    EXPECT_THROW(parse_axis("scenario=s9"), Error);
}

TEST(Sweep, EmptyAxisGivesEmptyTable) {
    const auto s = sweep(crossing(), parse_axis("loss="), {fog::Algorithm::tccw}, 2);
    EXPECT_TRUE(s.cells.empty());
    EXPECT_EQ(sweep_csv(s), std::string(kResultsHeader) + "\n");
}

TEST(Sweep, TableCardinality) {
    auto c = crossing();
    const std::vector<fog::Algorithm> algs{fog::Algorithm::tccw, fog::Algorithm::fwc, fog::Algorithm::cbw};
    const auto s = sweep(c, parse_axis("loss=0,0.03,0.06"), algs, 3, 2);
    ASSERT_EQ(s.cells.size(), 9u);
    EXPECT_EQ(count_lines(sweep_csv(s)), 1 + 9);
    for (const auto& cell : s.cells) EXPECT_TRUE(cell.ok) << cell.error;
}

TEST(Sweep, CellsAreIndependent) {
    auto c = load_config(VFCW_DATA_DIR "/configs/run_tccw.json");
    const std::vector<fog::Algorithm> algs{fog::Algorithm::tccw, fog::Algorithm::cbw};
    const auto full = sweep(c, parse_axis("loss=0,0.04"), algs, 3, 2);
    const auto one = sweep(c, parse_axis("loss=0.04"), {fog::Algorithm::cbw}, 3, 1);
    ASSERT_EQ(one.cells.size(), 1u);
    const Cell* match = nullptr;
    for (const auto& cell : full.cells) {
        if (cell.value == "0.04" && cell.algorithm == fog::Algorithm::cbw) match = &cell;
    }
    ASSERT_NE(match, nullptr);
    EXPECT_EQ(match->seed, one.cells[0].seed);
    EXPECT_EQ(match->tp, one.cells[0].tp);
    EXPECT_EQ(match->fp, one.cells[0].fp);
    EXPECT_EQ(match->fn, one.cells[0].fn);
    EXPECT_EQ(match->precision, one.cells[0].precision);
}

TEST(Sweep, FailedCellIsRecorded) {
    auto c = crossing();
    c.channel.model = "trace";
    c.channel.trace_path = "/nonexistent/trace.txt";
    const auto s = sweep(c, parse_axis("loss=0,0.1"), {fog::Algorithm::tccw}, 1, 1);
    ASSERT_EQ(s.cells.size(), 2u);
    for (const auto& cell : s.cells) EXPECT_FALSE(cell.ok);
    EXPECT_EQ(count_lines(sweep_errors_csv(s)), 3);
}

TEST(Sweep, DeterministicFiles) {
    auto c = crossing();
    const auto ax = parse_axis("headway=0.5,1,2");
    const auto a = scratch("sw_a"), b = scratch("sw_b");
    write_sweep_outputs(sweep(c, ax, {fog::Algorithm::tccw}, 2, 2), a, true);
    write_sweep_outputs(sweep(c, ax, {fog::Algorithm::tccw}, 2, 1), b, true);
    for (const char* f : {"sweep.csv", "sweep_runs.csv", "sweep_headway.svg"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
