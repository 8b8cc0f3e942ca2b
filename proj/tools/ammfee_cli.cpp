#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ammfee/acceptance.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/experiment.hpp"
#include "ammfee/figures.hpp"

namespace fs = std::filesystem;
using namespace ammfee;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kAcceptanceFailure = 4;

struct Common {
    std::string config;
    std::string out_dir;
    std::optional<int> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    int threads = 0;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "experiment JSON");
    if (needs_config) opt->required();
    app->add_option("--out-dir", c.out_dir, "output directory (default $AMMFEE_OUT_DIR, else ./out)");
    app->add_option("--paths", c.paths, "Monte Carlo paths");
    app->add_option("--seed", c.seed, "base seed");
    app->add_option("--dt", c.dt, "simulation step");
    app->add_option("--threads", c.threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);
}

fs::path out_dir(const Common& c) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (const char* env = std::getenv("AMMFEE_OUT_DIR"); env && *env) return env;
    return "out";
}

ExperimentConfig prepare(const Common& c) {
    RunOptions o;
    o.threads = c.threads;
    o.paths = c.paths;
    o.seed = c.seed;
    o.dt = c.dt;
    return apply_options(load_config(c.config), o);
}

fs::path make_dir(const Common& c, const ExperimentConfig& cfg) {
    auto dir = out_dir(c) / cfg.name;
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, RunManifest m) {
    m.timestamp = now_utc_iso8601();
    std::ofstream out(dir / "manifest.json");
    out << m.to_json(true).dump(2) << '\n';
}

void report(const std::vector<fs::path>& files) {
    for (const auto& f : files) std::cout << f.string() << '\n';
}

int cmd_solve(const Common& c) {
    const auto cfg = prepare(c);
    const auto market = build_market(cfg);
    const auto solution = solve_market(market, solver_settings(cfg, c.threads));
    const auto dir = make_dir(c, cfg);
    report(write_surfaces(cfg, solution, market, dir));
    write_manifest(dir, make_manifest(cfg));
    return 0;
}

int cmd_simulate(const Common& c) {
    const auto cfg = prepare(c);
    const auto market = build_market(cfg);
    const auto solution = solve_market(market, solver_settings(cfg, c.threads));
    const auto dir = make_dir(c, cfg);
    const auto manifest = make_manifest(cfg);
    CsvTable csv({"type", "path", "venue", "fees", "n_sell", "n_buy", "volume", "size", "convexity", "boundary_hits",
                  "terminal_index"});
    for (auto kind : cfg.policies) {
        const auto sim = make_sim_config(cfg, market, make_policies(kind, solution, market, cfg.linear_window),
                                         c.threads);
        const auto batch = run_batch(sim);
        for (std::size_t p = 0; p < batch.paths.size(); ++p) {
            const auto& venues = batch.paths[p].venues;
            for (std::size_t v = 0; v < venues.size(); ++v) {
                const auto& s = venues[v];
                csv.row({table_type_label(kind), std::to_string(p), player_label(cfg.players, static_cast<int>(v)),
                         format_number(s.fees), std::to_string(s.n_sell), std::to_string(s.n_buy),
                         format_number(s.volume), format_number(s.size), format_number(s.convexity),
                         std::to_string(s.boundary_hits), std::to_string(s.terminal_index)});
            }
        }
    }
    const auto path = dir / "paths.csv";
    csv.write_file(path, manifest.comment_lines());
    write_manifest(dir, manifest);
    report({path});
    return 0;
}

int cmd_table(const Common& c) {
    const auto cfg = prepare(c);
    const auto table = run_table(cfg, c.threads);
    const auto dir = make_dir(c, cfg);
    const auto manifest = make_manifest(cfg);
    const auto path = dir / "table.csv";
    table_csv(table).write_file(path, manifest.comment_lines());
    write_manifest(dir, manifest);
    table_csv(table).write(std::cout, {});
    return 0;
}

int cmd_figure(const Common& c, const std::vector<std::string>& ids) {
    const auto cfg = prepare(c);
    const auto wanted = ids.empty() ? cfg.figures : ids;
    if (wanted.empty()) throw ConfigError("no figure ids given and the config lists none");
    const auto dir = out_dir(c) / cfg.name;
    report(write_figures(wanted, cfg, c.threads, dir));
    write_manifest(dir, make_manifest(cfg));
    return 0;
}

int cmd_verify(const Common& c, const std::string& experiments) {
    AcceptanceOptions o;
    o.experiments_dir = experiments;
    o.work_dir = out_dir(c) / "verify";
    o.threads = c.threads;
    o.progress = &std::cerr;
    fs::create_directories(o.work_dir);
    const auto results = run_acceptance(o);
    print_acceptance(std::cout, results);
    for (const auto& r : results) {
        if (!r.pass()) return kAcceptanceFailure;
    }
    return 0;
}

int cmd_list() {
    for (const auto& e : figure_catalog()) {
        std::cout << e.id << "\t" << e.description << "\n    columns:";
        for (const auto& col : e.columns) std::cout << ' ' << col;
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic-fee equilibria between competing CFMM pools"};
    app.require_subcommand(1);

    Common solve, simulate, table, figure, verify;
    add_common(app.add_subcommand("solve", "solve the fee equilibrium and write surfaces"), solve, true);
    add_common(app.add_subcommand("simulate", "simulate paths and write per-path results"), simulate, true);
    add_common(app.add_subcommand("table", "simulate every policy kind and write the table"), table, true);
    auto* fig = app.add_subcommand("figure-data", "write figure CSVs");
    add_common(fig, figure, true);
    std::vector<std::string> ids;
    fig->add_option("ids", ids, "figure ids (default: the config's list)");
    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    add_common(ver, verify, false);
    std::string experiments = "experiments";
    ver->add_option("--experiments", experiments, "directory holding the experiment configs");
    app.add_subcommand("list", "list figure ids and their columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        if (name == "solve") return cmd_solve(solve);
        if (name == "simulate") return cmd_simulate(simulate);
        if (name == "table") return cmd_table(table);
        if (name == "figure-data") return cmd_figure(figure, ids);
        if (name == "verify") return cmd_verify(verify, experiments);
        return cmd_list();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const GridError& e) {
        std::cerr << "grid error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SolverError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
