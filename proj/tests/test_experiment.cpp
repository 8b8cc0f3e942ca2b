#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ammfee/errors.hpp"
#include "ammfee/experiment.hpp"
#include "ammfee/figures.hpp"

using namespace ammfee;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ammfee_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Config, Defaults) {
    const auto c = parse_config_text(R"({"schema_version": 1, "name": "x"})", "cfg.json");
    EXPECT_EQ(c.players, 2);
    EXPECT_EQ(c.calibration, Calibration::fair_split);
    EXPECT_EQ(c.time_steps, 1000);
}

TEST(Config, Diagnostics) {
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "playerz": 2})").find("config.playerz"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "players": "two"})").find("config.players"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "overrides": {"k0": "a"}})").find("config.overrides.k0"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"name": "x"})").find("schema_version"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "policies": ["greedy"]})").find("greedy"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "figures": ["nope"]})").find("nope"), std::string::npos);
    EXPECT_NE(error_of("{\n  \"schema_version\": 1,\n  \"name\": \"x\",,\n}").find("cfg.json:3:"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "name": "x", "calibration": "even"})"), "");
}

TEST(Config, HashIgnoresThreadsAndTracksOverrides) {
    const auto c = parse_config_text(R"({"schema_version": 1, "name": "x"})", "cfg.json");
    RunOptions o;
    o.threads = 7;
    EXPECT_EQ(config_hash(c), config_hash(apply_options(c, o)));
    o.paths = 50;
    EXPECT_NE(config_hash(c), config_hash(apply_options(c, o)));
    const auto round = parse_config(to_json(apply_options(c, o)));
    EXPECT_EQ(config_hash(round), config_hash(apply_options(c, o)));
}

TEST(Config, FairSplitMarket) {
    const auto c = parse_config_text(R"({"schema_version": 1, "name": "x", "k": 2, "lambda": 100})", "cfg.json");
    const auto m = build_market(c);
    ASSERT_EQ(m.players(), 2);
    EXPECT_DOUBLE_EQ(m.grids[0].spec().depth_sq, 2.5e7);
    EXPECT_DOUBLE_EQ(m.grids[0].y(0), 500.0);
    EXPECT_DOUBLE_EQ(m.flow.lambda_buy[1], 100.0);
    EXPECT_DOUBLE_EQ(m.flow.k0[0], 2.0);
    EXPECT_DOUBLE_EQ(m.flow.k_cross[0][1], 2.0);
    const auto mono = build_market(c, 1, Calibration::monopoly);
    EXPECT_DOUBLE_EQ(mono.grids[0].spec().depth_sq, 1e8);
    const auto canon = build_market(c, 2, Calibration::canonical);
    EXPECT_DOUBLE_EQ(canon.grids[0].spec().rate_step, 0.2);
    EXPECT_DOUBLE_EQ(canon.flow.k0[0], 1.0);
    EXPECT_DOUBLE_EQ(canon.flow.lambda_sell[0], 50.0);
}

TEST(Config, OverridesApply) {
    const auto c = parse_config_text(
        R"({"schema_version": 1, "name": "x", "overrides": {"k0": [1, 3], "lambda_buy": [40, 60], "N": 5, "s0": 101}})",
        "cfg.json");
    const auto m = build_market(c);
    EXPECT_DOUBLE_EQ(m.flow.k0[1], 3.0);
    EXPECT_DOUBLE_EQ(m.flow.lambda_buy[0], 40.0);
    EXPECT_DOUBLE_EQ(m.flow.lambda_sell[0], 100.0);
    EXPECT_EQ(m.grids[0].halfwidth(), 5);
    EXPECT_DOUBLE_EQ(solver_settings(c, 1).oracle, 101.0);
}

TEST(Csv, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 18.219999999999, 1e-300, -2.5}) EXPECT_EQ(std::stod(format_number(v)), v);
    EXPECT_EQ(format_number(std::optional<double>{}), "");
    EXPECT_EQ(format_number(100.0), "100");
}

TEST(Csv, ManifestHashExcludesTimestamp) {
    RunManifest m;
    m.experiment = "x";
    m.config_hash = "abc";
    const auto h = m.hash();
    m.timestamp = "2026-01-01T00:00:00Z";
    EXPECT_EQ(m.hash(), h);
    const auto lines = m.comment_lines();
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines[0], "manifest_hash=" + h);
    std::ostringstream out;
    CsvTable t({"a", "b"});
    t.row({"1", "2"});
    t.write(out, lines);
    EXPECT_EQ(out.str().substr(0, 15), "# manifest_hash");
    EXPECT_NE(out.str().find("\na,b\n1,2\n"), std::string::npos);
    EXPECT_EQ(out.str().find("2026"), std::string::npos);
}

TEST(Figures, CatalogComplete) {
    const auto& c = figure_catalog();
    EXPECT_EQ(c.size(), 8u);
    for (const char* id : {"fees-vs-inventory", "fees-3d", "fees-vs-time", "fees-vs-oracle", "bid-ask-vs-volume",
                           "slippage-vs-volume", "venue-revenue", "revenue-per-player"}) {
        EXPECT_TRUE(is_figure_id(id)) << id;
    }
    const auto cfg = parse_config_text(R"({"schema_version": 1, "name": "x"})", "cfg.json");
    try {
        write_figure_data("fig-1", cfg, 1, fs::temp_directory_path());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("revenue-per-player"), std::string::npos);
    }
}

TEST(Figures, InventorySlicesAndCrossing) {
    const auto cfg = load_config(fs::path(AMMFEE_EXPERIMENTS_DIR) / "fees_duopoly.json");
    const auto dir = scratch("inventory");
    const auto files = write_figure_data("fees-vs-inventory", cfg, 2, dir);
    ASSERT_EQ(files.size(), 3u);
    EXPECT_EQ(files[0].filename(), "fees-vs-inventory_rival0.csv");
    EXPECT_EQ(files[1].filename(), "fees-vs-inventory_rival8.csv");
    EXPECT_EQ(files[2].filename(), "fees-vs-inventory_rival-12.csv");
    std::ifstream in(files[0]);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) rows += line.empty() || line[0] == '#' ? 0 : 1;
    EXPECT_EQ(rows, 1 + 41);
}

TEST(Table, SmallRunHasTotalsAndBenchmark) {
    auto cfg = load_config(fs::path(AMMFEE_EXPERIMENTS_DIR) / "table1_k2.json");
    cfg.overrides.n_paths = 200;
    cfg.time_steps = 200;
    const auto t = run_table(cfg, 2);
    ASSERT_TRUE(t.has("duopoly", "Total", PolicyKind::constant));
    ASSERT_TRUE(t.has("monopoly", "Monopoly", PolicyKind::equilibrium));
    const auto& a = t.find("duopoly", "A", PolicyKind::equilibrium);
    const auto& b = t.find("duopoly", "B", PolicyKind::equilibrium);
    const auto& total = t.find("duopoly", "Total", PolicyKind::equilibrium);
    EXPECT_NEAR(total.fees.mean, a.fees.mean + b.fees.mean, 1e-9);
    EXPECT_THROW(t.find("duopoly", "C", PolicyKind::linear), InputError);
    const auto csv = table_csv(t);
    EXPECT_EQ(csv.columns()[0], "structure");
    EXPECT_EQ(csv.columns()[3], "fees");
    EXPECT_EQ(csv.columns()[4], "fees_se");
}
