#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ammfee/csv.hpp"
#include "ammfee/equilibrium_solver.hpp"
#include "ammfee/fee_policy.hpp"
#include "ammfee/metrics.hpp"
#include "ammfee/simulator.hpp"
#include "json.hpp"

namespace ammfee {

// fair_split:  depth_sq = monopoly_depth_sq / M^2, same Z step, k0 = k_cross = k, lambda per side per venue.
// canonical:   depth_sq = monopoly_depth_sq / M^2, Z step times M, k0 = k_cross = k / M, lambda / M.
// monopoly:    one pool with the monopoly depth, k0 = k.
enum class Calibration { fair_split, canonical, monopoly };

const char* to_string(Calibration c);
Calibration calibration_from_string(const std::string& name);

struct ConfigOverrides {
    std::optional<std::vector<double>> k0;
    std::optional<std::vector<std::vector<double>>> k_cross;
    std::optional<std::vector<double>> lambda_buy;
    std::optional<std::vector<double>> lambda_sell;
    std::optional<double> sigma;
    std::optional<double> s0;
    std::optional<double> horizon;
    std::optional<int> grid_halfwidth;
    std::optional<double> dt;
    std::optional<int> n_paths;
    std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
    static constexpr int kSchemaVersion = 1;

    std::string name = "experiment";
    int players = 2;
    Calibration calibration = Calibration::fair_split;
    double k = 2.0;         // table-header k
    double lambda = 100.0;  // table-header lambda
    double monopoly_depth_sq = 1e8;
    double rate_step = 0.1;
    double center_rate = 100.0;
    int grid_halfwidth = 20;
    double horizon = 1.0;
    int time_steps = 1000;
    double s0 = 100.0;
    double sigma = 0.0;
    double zeta = 0.0;
    int n_paths = 100000;
    std::uint64_t seed = 20240917;
    int linear_window = 2;
    GeneratorMode generator_mode = GeneratorMode::pde;
    std::vector<PolicyKind> policies{PolicyKind::equilibrium, PolicyKind::linear, PolicyKind::constant};
    bool monopoly_benchmark = false;
    std::vector<std::string> figures;
    std::vector<double> activity_lambdas{25, 50, 100, 200, 400};
    std::vector<int> activity_players{1, 2, 3};
    int activity_paths = 20000;
    std::vector<double> snapshot_times{0.4, 0.45, 0.5, 0.55, 0.6};
    int surface_slice_stride = 1;
    ConfigOverrides overrides;

    // Simulation step; the solver grid unless dt is overridden.
    TimeGrid sim_time() const;
    TimeGrid solver_time() const;
};

// Strict parse: unknown fields and type mismatches raise ConfigError naming
// the field path. Parse failures report line and column.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Command-line overrides applied before hashing.
struct RunOptions {
    int threads = 0;
    std::optional<int> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
};

ExperimentConfig apply_options(ExperimentConfig cfg, const RunOptions& opts);

Market build_market(const ExperimentConfig& cfg, int players, Calibration calibration);
Market build_market(const ExperimentConfig& cfg);
SolverSettings solver_settings(const ExperimentConfig& cfg, int threads);
// Two-player path for M = 2, the general solver otherwise.
EquilibriumSolution solve_market(const Market& market, const SolverSettings& settings);
RunManifest make_manifest(const ExperimentConfig& cfg);

std::vector<FeePolicy> make_policies(PolicyKind kind, const EquilibriumSolution& solution, const Market& market,
                                     int linear_window);
SimConfig make_sim_config(const ExperimentConfig& cfg, const Market& market, std::vector<FeePolicy> policies,
                          int threads);

struct TableRow {
    std::string structure;  // duopoly, monopoly, 3-player, ...
    std::string player;     // A, B, ... or 1, 2, 3; Total for the venue sum
    PolicyKind kind = PolicyKind::equilibrium;
    Estimate fees, sell, buy, vol, boundary_hits;
};

struct TableResult {
    std::vector<TableRow> rows;

    const TableRow& find(const std::string& structure, const std::string& player, PolicyKind kind) const;
    bool has(const std::string& structure, const std::string& player, PolicyKind kind) const;
};

std::string structure_name(int players);
std::string player_label(int players, int venue);
const char* table_type_label(PolicyKind kind);

TableResult run_table(const ExperimentConfig& cfg, int threads);
CsvTable table_csv(const TableResult& table);

// Fee surfaces, one long-format CSV per player plus a JSON manifest.
std::vector<std::filesystem::path> write_surfaces(const ExperimentConfig& cfg, const EquilibriumSolution& solution,
                                                  const Market& market, const std::filesystem::path& out_dir);

struct ActivityPoint {
    int players = 0;
    double lambda = 0.0;
    Estimate volume;
    Estimate boundary_hits;  // per venue, averaged over venues
    SlippageReport slippage;
    StrategicSummary strategic;
    RevenueRow revenue;
};

// Market-activity scan: lambda over cfg.activity_lambdas for each structure in
// cfg.activity_players, equilibrium policies, cfg.activity_paths paths. The
// monopoly uses one child trade; M venues use M child trades of one step.
std::vector<ActivityPoint> activity_scan(const ExperimentConfig& cfg, int threads);

}  // namespace ammfee
