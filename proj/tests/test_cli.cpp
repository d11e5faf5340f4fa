#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "isokit/cli.hpp"

using namespace isokit;

namespace {
struct Run {
    int code;
    std::string out, err;
};
Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "isokit");
    std::ostringstream o, e;
    int c = run_command(args, o, e);
    return {c, o.str(), e.str()};
}
std::string tmp(const std::string& n) { return testing::TempDir() + "cli_" + n; }
}  // namespace

TEST(Cli, SpaceBuildAndInfo) {
    auto s = tmp("s.json");
    auto r = run({"space", "build", "--kind", "cube", "--dim", "2", "--res", "64", "-o", s});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_space(s).size(), 64u * 64u);
    r = run({"space", "info", "-s", s});
    EXPECT_EQ(r.code, 0);
    EXPECT_FALSE(r.out.empty());
    std::remove(s.c_str());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"space", "build", "--kind", "torus", "-o", tmp("x.json")}).code, 2);
    EXPECT_EQ(run({"space", "info", "-s", tmp("missing.json")}).code, 3);
    auto s = tmp("i.json");
    ASSERT_EQ(run({"space", "build", "--kind", "interval", "--dim", "1", "--res", "4", "-o", s}).code, 0);
    auto f = tmp("bad.csv");
    write_text(f, "x\n");
    auto r = run({"rearrange", "-s", s, "-f", f});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("bad.csv:1:"), std::string::npos) << r.err;
    std::remove(s.c_str());
    std::remove(f.c_str());
}

TEST(Cli, RearrangeAndKfun) {
    auto s = tmp("k.json"), f = tmp("k.csv");
    ASSERT_EQ(run({"space", "build", "--kind", "interval", "--dim", "1", "--res", "4", "-o", s}).code, 0);
    write_text(f, "3\n1\n4\n1\n");
    auto r = run({"rearrange", "-s", s, "-f", f});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("t_lo,t_hi,value"), std::string::npos);
    EXPECT_NE(r.out.find(",4\n"), std::string::npos);

    r = run({"kfun", "-s", s, "-f", f, "--space-x", "lp:2", "--t", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string head, line;
    std::getline(in, head);
    std::getline(in, line);
    double t, K;
    char c;
    std::istringstream(line) >> t >> c >> K;
    auto S = load_space(s);
    GridFunction v{3, 1, 4, 1};
    GridNorm N(SpaceDescriptor::lp(2), S.measures);
    double cst = best_constant(S, v, SpaceDescriptor::lp(2));
    GridFunction d(4);
    for (int i = 0; i < 4; ++i) d[i] = v[i] - cst;
    EXPECT_GE(K, 0.0);
    EXPECT_LE(K, std::min(N.value(d), 0.1 * N.value(gradient_modulus(S, v))) + 1e-12);
    std::remove(s.c_str());
    std::remove(f.c_str());
}

TEST(Cli, VerifyNegativeLorentzReport) {
    auto rp = tmp("r.json");
    auto r = run({"verify", "--suite", "negative_lorentz", "--seed", "42", "--report", rp});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(read_text(rp));
    EXPECT_TRUE(j["ok"].get<bool>());
    for (const auto& rep : j["reports"]) EXPECT_EQ(rep["summary"]["fail_count"], 0);
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    std::remove(rp.c_str());
}

TEST(Cli, ConfigRoundTripAndPrecedence) {
    Config c;
    c.seed = 7;
    c.resolution = 32;
    c.kind = "interval";
    c.dim = 1;
    c.space_x = "lorentz:2:1";
    c.suites = {"oscillation", "garsia"};
    c.report = "out \"q\".json";
    c.out = "o.csv";
    auto p = tmp("c.toml");
    save_config(c, p);
    EXPECT_EQ(load_config(p), c);
    auto args = config_args(c, {"--seed"});
    EXPECT_EQ(std::count(args.begin(), args.end(), "--seed"), 0);
    EXPECT_EQ(std::count(args.begin(), args.end(), "--suite"), 2);
    std::remove(p.c_str());
}

TEST(Cli, ConfigErrors) {
    EXPECT_THROW(parse_config("seed = 1\nbogus = 2\n", "c"), input_error);
    try {
        parse_config("# c\nseed = x1\n", "c.toml");
        FAIL();
    } catch (const input_error& e) {
        EXPECT_NE(std::string(e.what()).find("c.toml:2:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config("[sec]\n", "c"), input_error);
}

TEST(Cli, ConfigDrivesCommand) {
    auto cfg = tmp("b.toml"), s = tmp("b.json");
    write_text(cfg, "kind = \"interval\"\ndim = 1\nresolution = 8\nout = \"" + s + "\"\n");
    auto r = run({"--config", cfg, "space", "build"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_space(s).size(), 8u);
    // explicit flag wins over the file
    r = run({"--config", cfg, "space", "build", "--res", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_space(s).size(), 5u);
    std::remove(cfg.c_str());
    std::remove(s.c_str());
}

TEST(Cli, EnvelopeCsv) {
    auto r = run({"envelope", "--space-x", "lp:2", "--kind", "growth", "--family", "logs", "--res", "64",
                  "--t-grid", "1e-3:0.1:4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("t,envelope,bound\n", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(Cli, BinaryRuns) {
    std::string cmd = std::string(ISOKIT_CLI_PATH) + " space build --kind interval --dim 1 --res 4 -o " +
                      tmp("bin.json") + " > /dev/null 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    std::string bad = std::string(ISOKIT_CLI_PATH) + " nope > /dev/null 2>&1";
    int st = std::system(bad.c_str());
    EXPECT_EQ(WEXITSTATUS(st), 2);
    std::remove(tmp("bin.json").c_str());
}
