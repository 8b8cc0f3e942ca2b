#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(AMMFEE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ammfee_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kExperiments = AMMFEE_EXPERIMENTS_DIR;

}  // namespace

TEST(Cli, ExitCodes) {
    const auto dir = scratch("codes");
    std::ofstream(dir / "bad.json") << "{\"schema_version\": 1,";
    std::ofstream(dir / "unknown.json") << R"({"schema_version": 1, "name": "x", "colour": 1})";
    EXPECT_EQ(run("list"), 0);
    EXPECT_EQ(run("solve --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run("solve --config " + (dir / "unknown.json").string()), 2);
    EXPECT_EQ(run("solve"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("figure-data --config " + kExperiments + "/fees_duopoly.json --out-dir " + dir.string() + " fig-9"), 2);
}

TEST(Cli, SolveIsIdempotent) {
    const auto a = scratch("solve_a");
    const auto b = scratch("solve_b");
    const std::string cfg = " --config " + kExperiments + "/fees_duopoly.json --out-dir ";
    ASSERT_EQ(run("solve" + cfg + a.string()), 0);
    ASSERT_EQ(run("solve" + cfg + b.string() + " --threads 3"), 0);
    int compared = 0;
    for (const auto& e : fs::directory_iterator(a / "fees_duopoly")) {
        if (e.path().extension() != ".csv") continue;
        EXPECT_EQ(slurp(e.path()), slurp(b / "fees_duopoly" / e.path().filename())) << e.path();
        ++compared;
    }
    EXPECT_EQ(compared, 2);
    EXPECT_TRUE(fs::exists(a / "fees_duopoly" / "manifest.json"));
}

TEST(Cli, OutDirFromEnvironment) {
    const auto dir = scratch("env");
    const std::string cmd = "AMMFEE_OUT_DIR=" + dir.string() + " " + AMMFEE_CLI_PATH + " table --config " +
                            kExperiments + "/fees_duopoly.json --paths 50 > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto text = slurp(dir / "fees_duopoly" / "table.csv");
    EXPECT_EQ(text.rfind("# manifest_hash=", 0), 0u);
    EXPECT_NE(text.find("duopoly,A,Optimal"), std::string::npos);
}
