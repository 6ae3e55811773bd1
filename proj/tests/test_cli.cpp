// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/image.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string("\"") + RGS_CLI_PATH + "\" " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rgs_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const std::string kSmall = R"({"synth": {"views": 5, "width": 24, "height": 24, "n_primitives": 12,
                                        "oracle_samples": 8, "selection": {"k": 2}},
                              "fit": {"iterations": 10}, "adapt": {"steps": 5}})";

fs::path small_config(const fs::path& dir) {
    std::ofstream(dir / "small.json") << kSmall;
    return dir / "small.json";
}

} // namespace

TEST(Cli, HelpListsSubcommandsAndDefaults) {
    const CliResult r = run("--help");
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"synth", "fit", "render", "adapt", "eval", "check", "export"})
        EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    const CliResult f = run("fit --help");
    EXPECT_EQ(f.code, 0);
    EXPECT_NE(f.out.find("-1"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("synth --bogus 1 --out x").code, 1);
    EXPECT_EQ(run("fit --data /nonexistent/dir --out x").code, 1);
    const CliResult miss = run("render --out y");
    EXPECT_EQ(miss.code, 1);
    EXPECT_NE(miss.out.find("--scene"), std::string::npos);
}

TEST(Cli, SchemaViolationExitsOneNamingTheField) {
    const fs::path dir = scratch("schema");
    std::ofstream(dir / "bad.json") << R"({"fit": {"iterationz": 3}})";
    const CliResult r = run("synth --config " + q(dir / "bad.json") + " --out " + q(dir / "out"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("fit.iterationz"), std::string::npos);
}

TEST(Cli, CorruptPlyExitsOne) {
    const fs::path dir = scratch("corrupt");
    std::ofstream(dir / "bad.ply") << "not a ply";
    std::ofstream(dir / "cams.json") << "[]";
    const CliResult r = run("render --scene " + q(dir / "bad.ply") + " --cameras " + q(dir / "cams.json") + " --out " +
                      q(dir / "out"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("missing header"), std::string::npos);
}

TEST(Cli, CheckPassesOnFixture) {
    const CliResult r = run("check");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("position"), std::string::npos);
    EXPECT_NE(r.out.find("color_q"), std::string::npos);
}

TEST(Cli, SynthTwiceIsByteIdentical) {
    const fs::path dir = scratch("synth");
    const std::string cfg = "--config " + q(small_config(dir));
    ASSERT_EQ(run("synth --seed 7 " + cfg + " --preset combined --out " + q(dir / "a")).code, 0);
    ASSERT_EQ(run("synth --seed 7 " + cfg + " --preset combined --out " + q(dir / "b")).code, 0);
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / fs::relative(e.path(), dir / "a"))) << e.path();
    }
    EXPECT_GT(files, 10);
}

TEST(Cli, OneSampleOracleWithoutBlurMatchesPlainRender) {
    const fs::path dir = scratch("mc");
    ASSERT_EQ(run("synth --seed 3 --config " + q(small_config(dir)) + " --preset none --out " + q(dir / "d")).code, 0);
    const std::string base = "render --scene " + q(dir / "d/scene.ply") + " --cameras " + q(dir / "d/cameras.json");
    ASSERT_EQ(run(base + " --out " + q(dir / "plain")).code, 0);
    ASSERT_EQ(run(base + " --mc-oracle 1 --out " + q(dir / "mc")).code, 0);
    for (const auto& e : fs::directory_iterator(dir / "plain"))
        EXPECT_EQ(slurp(e.path()), slurp(dir / "mc" / e.path().filename())) << e.path();
}

TEST(Cli, EndToEndPipeline) {
    const fs::path dir = scratch("e2e");
    const std::string cfg = "--config " + q(small_config(dir));
    ASSERT_EQ(run("synth --seed 5 " + cfg + " --preset combined --out " + q(dir / "d")).code, 0);
    const CliResult fit = run("fit " + cfg + " --data " + q(dir / "d") + " --out " + q(dir / "fit"));
    ASSERT_EQ(fit.code, 0) << fit.out;
    for (const char* f : {"scene.ply", "params.json", "loss.csv"}) EXPECT_TRUE(fs::exists(dir / "fit" / f)) << f;
    const CliResult adapt = run("adapt " + cfg + " --scene " + q(dir / "fit/scene.ply") + " --data " + q(dir / "d") +
                          " --out " + q(dir / "adapt"));
    ASSERT_EQ(adapt.code, 0) << adapt.out;
    EXPECT_TRUE(fs::exists(dir / "adapt/adapted_params.json"));
    const CliResult ev = run("eval " + cfg + " --data " + q(dir / "d") + " --scene " + q(dir / "fit/scene.ply") +
                       " --params " + q(dir / "adapt/adapted_params.json") + " --out " + q(dir / "eval.csv"));
    ASSERT_EQ(ev.code, 0) << ev.out;
    const std::string csv = slurp(dir / "eval.csv");
    EXPECT_NE(csv.find("psnr"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "eval_summary.csv"));
    const CliResult ex = run("export --scene " + q(dir / "fit/scene.ply") + " --params " + q(dir / "fit/params.json") +
                       " --out " + q(dir / "viewer.ply"));
    EXPECT_EQ(ex.code, 0) << ex.out;
    EXPECT_EQ(run("adapt --scene " + q(dir / "fit/scene.ply") + " --data " + q(dir / "d") + " --target blurry --out " +
                  q(dir / "x"))
                  .code,
              1);
}
