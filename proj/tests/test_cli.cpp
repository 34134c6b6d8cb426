#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(MGME_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string cfg(const std::string& name) { return std::string(MGME_CONFIG_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("mgme_cli_" + name);
}

}  // namespace

TEST(Cli, SelftestSucceeds) {
    const auto r = cli("selftest --configs 60");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("budget_identity"), std::string::npos);
}

TEST(Cli, MissingFileIsIoError) {
    EXPECT_EQ(cli("simulate /nonexistent/none.ini").code, 3);
    EXPECT_EQ(cli("slopes /nonexistent/none.csv").code, 3);
}

TEST(Cli, BadConfigIsConfigError) {
    const auto path = scratch("bad.ini");
    std::ofstream(path) << "[experiment]\npolicy = greedy\n";
    EXPECT_EQ(cli("simulate " + path.string()).code, 2);
    EXPECT_EQ(cli("simulate " + cfg("adaptive_ssg.ini") + " --set policy.p=0").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    std::filesystem::remove(path);
}

TEST(Cli, OracleReport) {
    const auto r = cli("oracle " + cfg("oracle_small.ini"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("oracle_counts=2,8"), std::string::npos);
    EXPECT_NE(r.out.find("rounded_counts=2,8"), std::string::npos);
    const auto p1 = cli("oracle " + cfg("oracle_small.ini") + " --set profile.p=1 --set profile.horizon=9");
    EXPECT_NE(p1.out.find("oracle_counts=3,6"), std::string::npos);
}

TEST(Cli, SimulateThenSlopes) {
    const auto out = scratch("sim.csv");
    const auto r = cli("simulate " + cfg("adaptive_ssg.ini") +
                       " --set experiment.horizons=200,600,2000,6000 --trials 4 --no-timing -o " + out.string() +
                       " --summary " + scratch("sum.csv").string());
    ASSERT_EQ(r.code, 0);
    const auto again = scratch("sim2.csv");
    cli("simulate " + cfg("adaptive_ssg.ini") + " --set experiment.horizons=200,600,2000,6000 --trials 4 --no-timing -o " +
        again.string() + " --summary " + scratch("sum2.csv").string());
    std::ifstream a(out), b(again);
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, sb);
    const auto s = cli("slopes " + out.string());
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("adaptive_ssg,adaptive,inf,4,"), std::string::npos);
    for (const char* f : {"sim.csv", "sim2.csv", "sum.csv", "sum2.csv"}) std::filesystem::remove(scratch(f));
}

TEST(Cli, BoundsCurves) {
    const auto r = cli("bounds " + cfg("nonadaptive_inf.ini"));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("#", 0), 0u);
    EXPECT_NE(r.out.find("T1_inf"), std::string::npos);
}
