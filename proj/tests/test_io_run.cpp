#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "lipval/io.hpp"
#include "lipval/models.hpp"
#include "lipval/mountain_car_traces.hpp"
#include "lipval/run.hpp"
#include "lipval/validators.hpp"

using namespace lipval;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("lipval_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                 "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

RunManifest mc_manifest(const TempDir& dir, const fs::path& traces) {
    write_text(dir / "mc.json", R"({"analytic":"mountain-car-step-pair"})");
    RunManifest m;
    m.model_path = dir / "mc.json";
    m.trace_paths = {traces};
    m.out = dir / "out.jsonl";
    m.config.max_samples = 2000;
    m.config.seed = 3;
    return m;
}

}  // namespace

TEST(TraceFormat, RoundTrip) {
    Trace t{"mc-001", {0.1234567890123456789}, {-1.0 / 3.0, 1e-300}, 0.25};
    const auto line = format_trace(t);
    const auto back = parse_trace(line, "x");
    EXPECT_EQ(back.id, t.id);
    EXPECT_EQ(back.input, t.input);
    EXPECT_EQ(back.output, t.output);
    EXPECT_EQ(back.time, t.time);
    Trace no_time{"n", {}, {1.0}, std::nullopt};
    EXPECT_FALSE(parse_trace(format_trace(no_time), "x").time);
    EXPECT_EQ(parse_trace(R"({"id":7,"u":[],"y":[1]})", "x").id, "7");
}

TEST(TraceFormat, MalformedLinesNameThePosition) {
    TempDir dir;
    write_text(dir / "bad.jsonl", "{\"id\":\"a\",\"u\":[],\"y\":[1]}\n{\"id\":\"b\",\"u\":[]}\n");
    try {
        read_traces(dir / "bad.jsonl");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos) << e.what();
    }
}

TEST(TraceFormat, EmptyFileNamesTheFile) {
    TempDir dir;
    write_text(dir / "empty.jsonl", "");
    try {
        read_traces(dir / "empty.jsonl");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("empty.jsonl"), std::string::npos);
    }
}

TEST(TraceFormat, GeneratorOutputParsesBackIdentically) {
    TempDir dir;
    TraceGenOptions opts;
    opts.seed = 17;
    opts.dt = 0.05;
    std::vector<Trace> traces;
    for (const auto& g : generate_mountain_car_traces(opts)) traces.push_back(g.trace);
    write_traces(dir / "t.jsonl", traces);
    const auto back = read_traces(dir / "t.jsonl");
    ASSERT_EQ(back.size(), traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        EXPECT_EQ(back[i].id, traces[i].id);
        EXPECT_EQ(back[i].input, traces[i].input);
        EXPECT_EQ(back[i].output, traces[i].output);
        EXPECT_EQ(back[i].time, traces[i].time);
    }
}

TEST(VerdictFormat, NineSignificantDigitsAndNull) {
    VerdictRecord r{"a\"b", 12, false, 0.123456789123, INFINITY, 5};
    const auto line = format_verdict(r);
    EXPECT_EQ(line.back(), '\n');
    EXPECT_NE(line.find("\"gamma\":0.123456789,"), std::string::npos) << line;
    EXPECT_NE(line.find("\"min_disc\":null"), std::string::npos) << line;
    const auto back = parse_verdict(line, "x");
    EXPECT_EQ(back.trace_id, "a\"b");
    EXPECT_EQ(back.k, 12u);
    EXPECT_TRUE(std::isinf(back.min_disc));
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.size(), 6u);
    for (const char* key : {"trace_id", "k", "phi", "gamma", "min_disc", "elapsed_ns"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(VerdictFormat, TruncatedTailIsIgnored) {
    TempDir dir;
    const std::string a = format_verdict({"t", 1, false, 0.0, 0.5, 0});
    const std::string b = format_verdict({"t", 2, false, 0.0, 0.4, 0});
    write_text(dir / "v.jsonl", a + b.substr(0, b.size() / 2));
    const auto recs = read_verdicts(dir / "v.jsonl");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].k, 1u);
    write_text(dir / "w.jsonl", a + "garbage\n" + b);
    EXPECT_THROW(read_verdicts(dir / "w.jsonl"), InputError);
}

TEST(Generator, ExactNoisyCountAndDeterminism) {
    TraceGenOptions opts;
    opts.seed = 4;
    const auto a = generate_mountain_car_traces(opts);
    const auto b = generate_mountain_car_traces(opts);
    ASSERT_EQ(a.size(), 40u);
    std::size_t noisy = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        noisy += a[i].noisy;
        EXPECT_EQ(a[i].trace.output, b[i].trace.output);
        EXPECT_EQ(a[i].trace.id, b[i].trace.id);
    }
    EXPECT_EQ(noisy, 20u);
    opts.count = 0;
    EXPECT_THROW(generate_mountain_car_traces(opts), InputError);
}

TEST(Generator, NoiselessTracesAreReproducibleByTheModel) {
    TraceGenOptions opts;
    opts.noise_fraction = 0.0;
    opts.seed = 5;
    const auto model = mountain_car::make_model();
    for (const auto& g : generate_mountain_car_traces(opts)) {
        const std::vector<double> x{g.state.position, g.state.velocity};
        EXPECT_EQ(discrepancy(model, x, g.trace, {}), 0.0);
    }
}

TEST(Generator, DivergentNoiseExceedsReachableDisplacement) {
    TraceGenOptions opts;
    opts.noise_fraction = 1.0;
    opts.seed = 6;
    for (const auto& g : generate_mountain_car_traces(opts)) {
        const double shown = std::abs(g.trace.output[1] - g.trace.output[0]);
        // |p2 - p1| <= max speed for every state, so half the excess bounds h from below.
        EXPECT_GT((shown - mountain_car::kMaxSpeed) / 2.0, 0.005);
    }
}

TEST(Run, BudgetZeroEmitsEmptyVerdicts) {
    TempDir dir;
    write_text(dir / "t.jsonl", R"({"id":"a","u":[0.0],"y":[-0.5,-0.5]}
{"id":"b","u":[0.0],"y":[-0.4,-0.3]}
)");
    auto m = mc_manifest(dir, dir / "t.jsonl");
    m.budget_ms = 0;
    std::ostringstream log;
    const auto s = run(m, log);
    EXPECT_EQ(s.exit_code, kExitBudgetReached);
    const auto recs = read_verdicts(m.out);
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) {
        EXPECT_FALSE(r.phi);
        EXPECT_EQ(r.gamma, 0.0);
        EXPECT_EQ(r.k, 0u);
    }
    const auto meta = nlohmann::json::parse(read_file(meta_path(m.out)));
    EXPECT_EQ(meta["status"], "budget");
}

TEST(Run, EmptyTraceFileIsExitThree) {
    TempDir dir;
    write_text(dir / "empty.jsonl", "");
    auto m = mc_manifest(dir, dir / "empty.jsonl");
    std::ostringstream log;
    const auto s = run(m, log);
    EXPECT_EQ(s.exit_code, kExitInputError);
    EXPECT_NE(s.message.find("empty.jsonl"), std::string::npos) << s.message;
}

TEST(Run, ShapeMismatchAndMissingModelAreExitThree) {
    TempDir dir;
    write_text(dir / "t.jsonl", R"({"id":"a","u":[],"y":[0.0,0.0]})"
                                "\n");
    auto m = mc_manifest(dir, dir / "t.jsonl");
    std::ostringstream log;
    EXPECT_EQ(run(m, log).exit_code, kExitInputError);
    m.model_path = dir / "missing.json";
    EXPECT_EQ(run(m, log).exit_code, kExitInputError);
}

TEST(Run, ExactDeciderBudgetIsExitFour) {
    TempDir dir;
    write_text(dir / "id.json",
               R"({"analytic":"identity","bounds":{"lower":[0,0,0],"upper":[1,1,1]}})");
    write_text(dir / "t.jsonl", R"({"id":"a","u":[],"y":[1.5,1.5,1.5]})"
                                "\n");
    RunManifest m;
    m.model_path = dir / "id.json";
    m.trace_paths = {dir / "t.jsonl"};
    m.out = dir / "o.jsonl";
    m.decider = DeciderKind::exact;
    m.config.epsilon = 0.45;
    m.config.max_samples = 100000;
    // The first refresh at k = 1000 already needs ~(2k)^3 cells.
    m.record_every = 1000;
    std::ostringstream log;
    EXPECT_EQ(run(m, log).exit_code, kExitResourceError);
}

TEST(Run, FixedSeedIsByteIdentical) {
    TempDir dir;
    TraceGenOptions opts;
    opts.count = 6;
    opts.seed = 2;
    std::vector<Trace> traces;
    for (const auto& g : generate_mountain_car_traces(opts)) traces.push_back(g.trace);
    write_traces(dir / "t.jsonl", traces);
    auto m = mc_manifest(dir, dir / "t.jsonl");
    m.timing = false;
    std::ostringstream log;
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    const std::string first = read_file(m.out);
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    EXPECT_EQ(read_file(m.out), first);
    m.config.seed = 4;
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    EXPECT_NE(read_file(m.out), first);
}

TEST(Run, OneRecordPerSampleMatchesDirectValidator) {
    TempDir dir;
    write_text(dir / "t.jsonl", R"({"id":"a","u":[0.5],"y":[-0.6,-0.4]})"
                                "\n");
    auto m = mc_manifest(dir, dir / "t.jsonl");
    m.config.max_samples = 500;
    std::ostringstream log;
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    const auto recs = read_verdicts(m.out);
    ASSERT_EQ(recs.size(), 500u);

    auto cfg = m.config;
    cfg.seed = derive_seed(m.config.seed, 0);
    const Trace t = read_traces(dir / "t.jsonl").front();
    ProbabilisticValidator v(mountain_car::make_model(), t, cfg);
    for (const auto& r : recs) {
        const auto& out = v.step();
        EXPECT_EQ(r.k, out.samples_evaluated);
        EXPECT_NEAR(r.gamma, out.confidence, 5e-9 * std::max(1.0, out.confidence));
        EXPECT_EQ(r.min_disc, out.min_discrepancy_seen);
    }
}

TEST(Report, TablesAndMixedModelRejection) {
    TempDir dir;
    TraceGenOptions opts;
    opts.count = 8;
    opts.seed = 9;
    std::vector<Trace> traces;
    for (const auto& g : generate_mountain_car_traces(opts)) traces.push_back(g.trace);
    write_traces(dir / "t.jsonl", traces);
    auto m = mc_manifest(dir, dir / "t.jsonl");
    m.config.max_samples = 3000;
    m.config.bins = 100000;
    m.record_every = 100;
    std::ostringstream log;
    m.config.delta = 0.1;
    m.out = dir / "d1.jsonl";
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    m.config.delta = 0.2;
    m.out = dir / "d2.jsonl";
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);

    std::ostringstream summary;
    const std::vector<fs::path> files{dir / "d1.jsonl", dir / "d2.jsonl"};
    const auto rs = report(files, dir / "rep", summary);
    EXPECT_EQ(rs.configs, 2u);
    EXPECT_EQ(rs.traces, 16u);
    for (const char* f : {"final_verdicts.tsv", "confidence_curve.tsv", "samples_to_consistent.tsv",
                          "timing.tsv"})
        EXPECT_TRUE(fs::exists(dir / "rep" / f)) << f;
    const std::string curve = read_file(dir / "rep" / "confidence_curve.tsv");
    EXPECT_NE(curve.find("prob delta=0.1\t"), std::string::npos);
    EXPECT_NE(curve.find("prob delta=0.2\t"), std::string::npos);
    const std::string finals = read_file(dir / "rep" / "final_verdicts.tsv");
    EXPECT_EQ(std::count(finals.begin(), finals.end(), '\n'), 17);

    write_text(dir / "other.json", R"({"analytic":"mountain-car-step-pair","lipschitz":4})");
    m.model_path = dir / "other.json";
    m.out = dir / "d3.jsonl";
    ASSERT_EQ(run(m, log).exit_code, kExitDecided);
    const std::vector<fs::path> mixed{dir / "d1.jsonl", dir / "d3.jsonl"};
    EXPECT_THROW(report(mixed, dir / "rep2", summary), InputError);
}

TEST(Report, SingleTraceSingleVerdict) {
    TempDir dir;
    write_text(dir / "t.jsonl", R"({"id":"only","u":[0.0],"y":[-0.5,-0.5]})"
                                "\n");
    auto m = mc_manifest(dir, dir / "t.jsonl");
    m.budget_ms = 0;
    std::ostringstream log;
    run(m, log);
    std::ostringstream summary;
    const std::vector<fs::path> files{m.out};
    report(files, dir / "rep", summary);
    const std::string finals = read_file(dir / "rep" / "final_verdicts.tsv");
    EXPECT_EQ(std::count(finals.begin(), finals.end(), '\n'), 2);
    EXPECT_NE(finals.find("only"), std::string::npos);
}
