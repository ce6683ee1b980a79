#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tsl/cli.hpp"
#include "tsl/errors.hpp"

using namespace tsl;

namespace {

const std::string kSource = TSL_SOURCE_DIR;

std::string spec_path(const std::string& name) { return kSource + "/data/specs/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const char* kThreeState = "space 3\n"
                          "gen s1 = 2 1 2\n"
                          "gen s2 = 3 3 1\n"
                          "noise iid s1:1/2 s2:1/2\n";

} // namespace

TEST(ParseSpec, ThreeStateExample) {
    const auto spec = parse_spec(kThreeState);
    EXPECT_EQ(spec.mode, SpecMode::SemigroupAction);
    EXPECT_EQ(spec.size, 3u);
    ASSERT_EQ(spec.generators.size(), 2u);
    EXPECT_EQ(spec.generators[0].name, "s1");
    EXPECT_EQ(spec.generators[0].image, (std::vector<std::size_t>{2, 1, 2}));
    EXPECT_EQ(spec.generators[1].image, (std::vector<std::size_t>{3, 3, 1}));
    ASSERT_EQ(spec.iid.size(), 2u);
    EXPECT_EQ(spec.iid[1].weight, Rational(1, 2));
    EXPECT_TRUE(spec.at.empty());

    const auto pb = build_problem(spec);
    EXPECT_EQ(pb.ctx.sg().size(), 7u);
    EXPECT_EQ(pb.ctx.sg().label(0), "s1");
    EXPECT_EQ(pb.noise.tail()[0], Rational(1, 2));
}

TEST(ParseSpec, CyclicExample) {
    const auto spec = parse_spec("group Z 4\nnoise iid 0:1/2 2:1/2\n");
    EXPECT_EQ(spec.mode, SpecMode::Cyclic);
    const auto pb = build_problem(spec);
    ASSERT_TRUE(pb.ctx.group.has_value());
    EXPECT_EQ(pb.noise.tail().support(), (std::vector<std::size_t>{0, 2}));
}

TEST(ParseSpec, SymmetricNamesAreOneLineLabels) {
    const auto pb = build_problem(parse_spec("group S 3\nnoise iid 213:1\n"));
    EXPECT_EQ(pb.ctx.sg().size(), 6u);
    const auto supp = pb.noise.tail().support();
    ASSERT_EQ(supp.size(), 1u);
    EXPECT_EQ(pb.ctx.sg().label(supp[0]), "213");
}

TEST(ParseSpec, CommentsAndBlankLines) {
    const auto spec = parse_spec("# header\n\nspace 2   # two states\n"
                                 "gen a = 2 1\r\nnoise iid a:1 # deterministic\n");
    EXPECT_EQ(spec.size, 2u);
    EXPECT_EQ(spec.iid.size(), 1u);
}

TEST(ParseSpec, ErrorsCarryLineNumbers) {
    struct Case {
        const char* text;
        std::size_t line;
        const char* fragment;
    };
    const std::vector<Case> cases{
        {"space 2\ngen a = 1 1\nnoise iid a:2/3\n", 3, "sum"},
        {"space 2\nfoo 1\n", 2, "unknown keyword"},
        {"gen a = 1 1\n", 1, "before 'space'"},
        {"space 2\nspace 3\n", 2, "duplicate"},
        {"space 2\ngen a = 1 3\n", 2, "outside"},
        {"space 2\ngen a = 1\n", 2, "needs 2"},
        {"space 2\ngen a = 1 1\ngen a = 2 2\n", 3, "duplicate generator"},
        {"space 2\ngen a = 1 1\nnoise iid b:1\n", 3, "undeclared"},
        {"space 2\ngen a = 1 1\nnoise iid a:1/2 a:1/2\n", 3, "repeated"},
        {"space 2\ngen a = 1 1\nnoise iid a:-1\n", 3, "negative"},
        {"space 2\ngen a = 1 1\nnoise iid a:x\n", 3, "malformed"},
        {"space 2\ngen a = 1 1\ngen b = 2 2\nnoise iid a:3/2 b:-1/2\n", 4, "negative"},
        {"space 2\ngen a = 1 1\nnoise iid a:1\nnoise at 1 a:1\n", 4, "<= 0"},
        {"space 2\ngen a = 1 1\nnoise iid a:1\nnoise iid a:1\n", 4, "duplicate"},
        {"space 2\ngen a = 1 1\nnoise at 0 a:1\n", 3, "missing 'noise iid'"},
        {"group Z 3\ngen a = 1 1 1\n", 2, "not allowed"},
        {"group Z 3\nspace 3\n", 2, "cannot be combined"},
        {"group S 7\n", 1, "up to degree"},
        {"space 2\ngen a = 1 1\ngen b = 1 1\n", 3, "repeats the map"},
        {"space 2\ngen a = 1 1\nnoise iid a:1/0\n", 3, "zero denominator"},
    };
    for (const auto& c : cases) {
        try {
            parse_spec(c.text);
            ADD_FAILURE() << "accepted: " << c.text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), c.line) << c.text;
            EXPECT_NE(std::string(e.what()).find(c.fragment), std::string::npos)
                << e.what();
        }
    }
}

TEST(ParseSpec, PrefixOverridesFillGapsWithTheTail) {
    const auto spec = parse_spec(std::string(kThreeState) + "noise at -2 s2:1\n");
    const auto pb = build_problem(spec);
    ASSERT_EQ(pb.noise.prefix_length(), 3u);
    EXPECT_EQ(pb.noise.at(0), pb.noise.tail());
    EXPECT_EQ(pb.noise.at(-1), pb.noise.tail());
    EXPECT_EQ(pb.noise.at(-2)[1], Rational(1));
    EXPECT_EQ(pb.noise.at(-3), pb.noise.tail());
}

TEST(ParseSpec, FixtureFilesRoundTrip) {
    for (const auto& entry : std::filesystem::directory_iterator(kSource + "/data/specs")) {
        if (entry.path().filename() == "bad_weights.tsl")
            continue;
        const auto spec = parse_spec(slurp(entry.path().string()));
        EXPECT_EQ(parse_spec(serialize_spec(spec)), spec) << entry.path();
    }
}

// Random well-formed specs: parse(serialize(s)) == s.
TEST(ParseSpec, RoundTripProperty) {
    std::mt19937_64 rng(20240611);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    auto random_law = [&](const std::vector<std::string>& names) {
        std::vector<std::string> pool = names;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(pick(1, pool.size()));
        std::vector<std::size_t> raw;
        for (std::size_t i = 0; i < pool.size(); ++i)
            raw.push_back(pick(0, 5));
        raw[0] += 1;
        std::size_t total = 0;
        for (auto r : raw)
            total += r;
        std::vector<NoiseEntry> out;
        for (std::size_t i = 0; i < pool.size(); ++i)
            out.push_back({pool[i], Rational(raw[i], total)});
        for (auto& e : out)
            e.weight.canonicalize();
        return out;
    };
    for (int trial = 0; trial < 200; ++trial) {
        ProblemSpec spec;
        std::vector<std::string> names;
        const auto kind = pick(0, 2);
        if (kind == 0) {
            spec.mode = SpecMode::SemigroupAction;
            spec.size = pick(1, 4);
            const auto count = pick(1, 3);
            for (std::size_t g = 0; g < count; ++g) {
                NamedGenerator gen{"g" + std::to_string(g), {}};
                for (std::size_t i = 0; i < spec.size; ++i)
                    gen.image.push_back(pick(1, spec.size));
                bool repeat = false;
                for (const auto& other : spec.generators)
                    repeat = repeat || other.image == gen.image;
                if (repeat)
                    continue;
                names.push_back(gen.name);
                spec.generators.push_back(std::move(gen));
            }
        } else if (kind == 1) {
            spec.mode = SpecMode::Cyclic;
            spec.size = pick(1, 7);
            for (std::size_t g = 0; g < spec.size; ++g)
                names.push_back(std::to_string(g));
        } else {
            spec.mode = SpecMode::Symmetric;
            spec.size = 3;
            names = {"123", "132", "213", "231", "312", "321"};
        }
        spec.iid = random_law(names);
        const auto overrides = pick(0, 2);
        for (std::size_t i = 0; i < overrides; ++i)
            spec.at[-static_cast<long>(pick(0, 4))] = random_law(names);
        const auto text = serialize_spec(spec);
        EXPECT_EQ(parse_spec(text), spec) << text;
        EXPECT_NO_THROW(build_problem(spec)) << text;
    }
}

TEST(RunCli, AnalyzeThreeStateReport) {
    const auto r = run({"analyze", spec_path("three_state_pq.tsl"), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["algebra"]["closure_size"], 7);
    EXPECT_EQ(j["algebra"]["core_size"], 7);
    EXPECT_EQ(j["algebra"]["synchronizing"].size(), 3u);
    EXPECT_TRUE(j["algebra"]["cancellative"].empty());
    EXPECT_EQ(j["algebra"]["left_cancellative"], false);
    EXPECT_EQ(j["limits"]["p1"], true);
    EXPECT_EQ(j["limits"]["p2"]["order"], 3);
    for (const auto& w : j["limits"]["nu"]["weights"])
        EXPECT_EQ(w, "1/3");
    EXPECT_EQ(j["limits"]["nu"]["weights"].size(), 3u);
    for (const auto& w : j["solutions"]["stationary"]["weights"])
        EXPECT_EQ(w, "1/3");
    EXPECT_EQ(j["classification"]["pathwise_unique"], true);
    EXPECT_EQ(j["classification"]["unique_in_law"], true);
    EXPECT_EQ(j["classification"]["all_solutions_strong"], true);
    const auto notes = j["classification"]["notes"].dump();
    EXPECT_NE(notes.find("Thm 4.6"), std::string::npos);
    EXPECT_NE(notes.find("Thm 5.1(ii),(iv)"), std::string::npos);
}

TEST(RunCli, AnalyzeZ2UniformIsNonStrong) {
    const auto r = run({"analyze", spec_path("z2_uniform.tsl"), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["limits"]["p2"]["order"], 2);
    EXPECT_EQ(j["solutions"]["extremals"].size(), 1u);
    EXPECT_EQ(j["classification"]["extremal_strong"][0], false);
    EXPECT_EQ(j["classification"]["trichotomy"], "C1");
    EXPECT_EQ(j["fourier"]["p_mu"], 0);
}

TEST(RunCli, GoldenOutputs) {
    struct Case {
        std::vector<std::string> args;
        const char* golden;
    };
    const std::vector<Case> cases{
        {{"analyze", spec_path("three_state_pq.tsl"), "--json"}, "three_state_analyze.json"},
        {{"analyze", spec_path("z2_uniform.tsl"), "--window", "4"}, "z2_uniform_analyze.txt"},
        {{"fourier", spec_path("z4_half.tsl"), "--json"}, "z4_half_fourier.json"},
    };
    for (const auto& c : cases) {
        const auto r = run(c.args);
        ASSERT_EQ(r.code, 0) << r.err;
        EXPECT_EQ(r.out, slurp(kSource + "/tests/golden/" + c.golden)) << c.golden;
    }
}

TEST(RunCli, SimulateCsvGoldenAndDeterminism) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto a = (dir / "tsl_cli_test_a.csv").string();
    const auto b = (dir / "tsl_cli_test_b.csv").string();
    const std::vector<std::string> base{"simulate", spec_path("three_state_pq.tsl"), "--depth",
                                        "16",       "--trials", "2000", "--seed", "7", "--json",
                                        "--csv"};
    auto args_a = base, args_b = base;
    args_a.push_back(a);
    args_b.push_back(b);
    const auto ra = run(args_a);
    const auto rb = run(args_b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(a), slurp(kSource + "/tests/golden/three_state_simulate.csv"));
    const auto j = nlohmann::json::parse(ra.out);
    EXPECT_EQ(j["stopping_time"]["exact_mean"], "3");
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(RunCli, ExitCodes) {
    EXPECT_EQ(run({"analyze", spec_path("bad_weights.tsl")}).code, 1);
    const auto bad = run({"analyze", spec_path("bad_weights.tsl")});
    EXPECT_NE(bad.err.find("line 3"), std::string::npos);
    EXPECT_EQ(run({"analyze", spec_path("missing.tsl")}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"bogus"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"simulate", spec_path("z2_uniform.tsl"), "--depth", "8"}).code, 1);
    EXPECT_EQ(run({"simulate", spec_path("z2_uniform.tsl"), "--depth", "8", "--trials", "0",
                   "--seed", "1"})
                  .code,
              1);
    EXPECT_EQ(run({"fourier", spec_path("three_state_pq.tsl")}).code, 2);
    EXPECT_EQ(run({"fourier", spec_path("s3_transposition.tsl")}).code, 2);
}

TEST(RunCli, CapacityLimitIsActionable) {
    const auto r = run({"analyze", spec_path("three_state_pq.tsl"), "--subgroup-cap", "8"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--subgroup-cap"), std::string::npos);
    EXPECT_FALSE(r.out.empty());
}

TEST(RunCli, GroupSimulationComparesProductLaw) {
    const auto r = run({"simulate", spec_path("z4_half.tsl"), "--depth", "8", "--trials", "4000",
                        "--seed", "3", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["product_law"].size(), 2u);
    for (const auto& row : j["product_law"]) {
        EXPECT_EQ(row["exact"], "1/2");
        EXPECT_LE(std::abs(row["empirical"].get<double>() - 0.5),
                  3 * row["stderr"].get<double>());
    }
}
