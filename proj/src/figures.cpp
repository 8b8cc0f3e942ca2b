#include "ammfee/figures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ammfee/errors.hpp"

namespace ammfee {

const std::vector<FigureEntry>& figure_catalog() {
    static const std::vector<FigureEntry> catalog{
        {"fees-vs-inventory", "player 1 fees against own index at t = 0.5, one file per rival level",
         {"t", "rival_index", "rival_y", "rival_z", "own_index", "own_y", "own_z", "buy_fee", "sell_fee"}},
        {"fees-3d", "player 1 fees over (own, rival) at t = 0.5",
         {"t", "own_index", "rival_index", "own_y", "rival_y", "buy_fee", "sell_fee"}},
        {"fees-vs-time", "player 1 fees over time at a few own indices, rivals at the centre",
         {"t_index", "t", "own_index", "buy_fee", "sell_fee"}},
        {"fees-vs-oracle", "player 1 fees at t = 0.5 for oracle values 95..105, rivals at the centre",
         {"s", "own_index", "own_z", "buy_fee", "sell_fee"}},
        {"bid-ask-vs-volume", "strategic routed ask, bid and spread against traded volume",
         {"players", "lambda", "volume", "volume_se", "ask", "ask_se", "bid", "bid_se", "spread", "spread_se"}},
        {"slippage-vs-volume", "average slippage against traded volume",
         {"players", "lambda", "volume", "volume_se", "slippage", "slippage_se", "ratio_of_means", "convexity",
          "fee_cash", "size", "boundary_hits", "excluded_paths"}},
        {"venue-revenue", "venue take (10% of fees) against traded volume",
         {"players", "lambda", "volume", "volume_se", "venue_revenue", "venue_revenue_se", "total_fees",
          "total_fees_se"}},
        {"revenue-per-player", "fee revenue per pool against traded volume",
         {"players", "lambda", "volume", "volume_se", "per_player", "per_player_se"}},
    };
    return catalog;
}

bool is_figure_id(const std::string& id) {
    const auto& c = figure_catalog();
    return std::any_of(c.begin(), c.end(), [&](const FigureEntry& e) { return e.id == id; });
}

int fee_crossing_index(const FeePolicy& policy, int time_index, std::span<const int> rivals) {
    const int n = policy.own_halfwidth();
    if (n < 1) throw InputError("crossing needs an interior grid state");
    int best = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (int j = -n + 1; j <= n - 1; ++j) {
        const double g = std::abs(*policy.buy_fee(time_index, j, rivals) - *policy.sell_fee(time_index, j, rivals));
        if (g < gap) {
            gap = g;
            best = j;
        }
    }
    return best;
}

namespace {

const FigureEntry& entry(const std::string& id) {
    for (const auto& e : figure_catalog()) {
        if (e.id == id) return e;
    }
    std::string ids;
    for (const auto& e : figure_catalog()) ids += (ids.empty() ? "" : ", ") + e.id;
    throw ConfigError("unknown figure id '" + id + "' (valid: " + ids + ")");
}

bool needs_scan(const std::string& id) {
    return id == "bid-ask-vs-volume" || id == "slippage-vs-volume" || id == "venue-revenue" ||
           id == "revenue-per-player";
}

int nearest_index(const InventoryGrid& grid, double y) {
    int best = 0;
    for (int j = -grid.halfwidth(); j <= grid.halfwidth(); ++j) {
        if (std::abs(grid.y(j) - y) < std::abs(grid.y(best) - y)) best = j;
    }
    return best;
}

struct Solved {
    Market market;
    EquilibriumSolution solution;
    FeePolicy policy;
};

Solved solve_for(const ExperimentConfig& cfg, int threads, std::optional<double> oracle = std::nullopt) {
    auto market = build_market(cfg);
    auto settings = solver_settings(cfg, threads);
    if (oracle) settings.oracle = *oracle;
    auto solution = solve_market(market, settings);
    auto policy = equilibrium_policy(solution.surfaces.front(), market.grids.front());
    return Solved{std::move(market), std::move(solution), std::move(policy)};
}

std::vector<std::filesystem::path> surface_figure(const std::string& id, const ExperimentConfig& cfg, int threads,
                                                  const std::filesystem::path& out_dir,
                                                  const std::vector<std::string>& comments) {
    const auto& columns = entry(id).columns;
    std::vector<std::filesystem::path> written;
    const int rivals = cfg.players - 1;

    if (id == "fees-vs-oracle") {
        CsvTable csv(columns);
        for (int s = 95; s <= 105; ++s) {
            const auto solved = solve_for(cfg, threads, static_cast<double>(s));
            const auto& grid = solved.market.grids.front();
            const int k = solved.policy.time_grid().index_at(0.5);
            const std::vector<int> centre(static_cast<std::size_t>(rivals), 0);
            for (int j = -grid.halfwidth(); j <= grid.halfwidth(); ++j) {
                csv.row({std::to_string(s), std::to_string(j), format_number(grid.z(j)),
                         format_number(solved.policy.buy_fee(k, j, centre)),
                         format_number(solved.policy.sell_fee(k, j, centre))});
            }
        }
        written.push_back(out_dir / (id + ".csv"));
        csv.write_file(written.back(), comments);
        return written;
    }

    const auto solved = solve_for(cfg, threads);
    const auto& grid = solved.market.grids.front();
    const auto& policy = solved.policy;
    const int k = policy.time_grid().index_at(0.5);
    const auto t = format_number(policy.time_grid().time(k));
    const int n = grid.halfwidth();

    if (id == "fees-vs-inventory") {
        if (rivals < 1) throw ConfigError("fees-vs-inventory needs at least two players");
        const auto& rgrid = solved.market.grids[1];
        const double y0 = rgrid.y(0);
        for (double y : {y0, y0 + 2.0, y0 - 3.0}) {
            const int l = nearest_index(rgrid, y);
            const std::vector<int> state(static_cast<std::size_t>(rivals), l);
            CsvTable csv(columns);
            for (int j = -n; j <= n; ++j) {
                csv.row({t, std::to_string(l), format_number(rgrid.y(l)), format_number(rgrid.z(l)), std::to_string(j),
                         format_number(grid.y(j)), format_number(grid.z(j)), format_number(policy.buy_fee(k, j, state)),
                         format_number(policy.sell_fee(k, j, state))});
            }
            written.push_back(out_dir / (id + "_rival" + std::to_string(l) + ".csv"));
            csv.write_file(written.back(), comments);
        }
    } else if (id == "fees-3d") {
        if (rivals < 1) throw ConfigError("fees-3d needs at least two players");
        const auto& rgrid = solved.market.grids[1];
        CsvTable csv(columns);
        std::vector<int> state(static_cast<std::size_t>(rivals), 0);
        for (int l = -rgrid.halfwidth(); l <= rgrid.halfwidth(); ++l) {
            state[0] = l;
            for (int j = -n; j <= n; ++j) {
                csv.row({t, std::to_string(j), std::to_string(l), format_number(grid.y(j)), format_number(rgrid.y(l)),
                         format_number(policy.buy_fee(k, j, state)), format_number(policy.sell_fee(k, j, state))});
            }
        }
        written.push_back(out_dir / (id + ".csv"));
        csv.write_file(written.back(), comments);
    } else if (id == "fees-vs-time") {
        CsvTable csv(columns);
        const std::vector<int> centre(static_cast<std::size_t>(rivals), 0);
        std::vector<int> owns;
        for (int j : {-10, -5, 0, 5, 10}) owns.push_back(std::clamp(j, -n, n));
        owns.erase(std::unique(owns.begin(), owns.end()), owns.end());
        const auto& time = policy.time_grid();
        for (int j : owns) {
            for (int kk = 0; kk <= time.steps; ++kk) {
                csv.row({std::to_string(kk), format_number(time.time(kk)), std::to_string(j),
                         format_number(policy.buy_fee(kk, j, centre)), format_number(policy.sell_fee(kk, j, centre))});
            }
        }
        written.push_back(out_dir / (id + ".csv"));
        csv.write_file(written.back(), comments);
    }
    return written;
}

std::filesystem::path scan_figure(const std::string& id, const std::vector<ActivityPoint>& scan,
                                  const std::filesystem::path& out_dir, const std::vector<std::string>& comments) {
    CsvTable csv(entry(id).columns);
    for (const auto& p : scan) {
        std::vector<std::string> row{std::to_string(p.players), format_number(p.lambda), format_number(p.volume.mean),
                                     format_number(p.volume.se)};
        if (id == "bid-ask-vs-volume") {
            for (const auto& e : {p.strategic.ask, p.strategic.bid, p.strategic.spread}) {
                row.push_back(format_number(e.mean));
                row.push_back(format_number(e.se));
            }
        } else if (id == "slippage-vs-volume") {
            const auto& s = p.slippage;
            for (double v : {s.avg_slippage.mean, s.avg_slippage.se, s.ratio_of_means, s.convexity_component,
                             s.fee_component, s.total_size, p.boundary_hits.mean}) {
                row.push_back(format_number(v));
            }
            row.push_back(std::to_string(s.excluded_paths));
        } else if (id == "venue-revenue") {
            for (const auto& e : {p.revenue.venue_revenue, p.revenue.total_fees}) {
                row.push_back(format_number(e.mean));
                row.push_back(format_number(e.se));
            }
        } else {
            row.push_back(format_number(p.revenue.per_player.mean));
            row.push_back(format_number(p.revenue.per_player.se));
        }
        csv.row(std::move(row));
    }
    const auto path = out_dir / (id + ".csv");
    csv.write_file(path, comments);
    return path;
}

}  // namespace

std::vector<std::filesystem::path> write_figures(const std::vector<std::string>& ids, const ExperimentConfig& cfg,
                                                 int threads, const std::filesystem::path& out_dir) {
    for (const auto& id : ids) (void)entry(id);
    std::filesystem::create_directories(out_dir);
    const auto manifest = make_manifest(cfg);
    auto comments = manifest.comment_lines();
    std::vector<std::filesystem::path> written;
    std::optional<std::vector<ActivityPoint>> scan;
    for (const auto& id : ids) {
        auto c = comments;
        c.push_back("figure=" + id);
        if (needs_scan(id)) {
            if (!scan) scan = activity_scan(cfg, threads);
            written.push_back(scan_figure(id, *scan, out_dir, c));
        } else {
            for (auto& p : surface_figure(id, cfg, threads, out_dir, c)) written.push_back(std::move(p));
        }
    }
    return written;
}

std::vector<std::filesystem::path> write_figure_data(const std::string& id, const ExperimentConfig& cfg, int threads,
                                                     const std::filesystem::path& out_dir) {
    return write_figures({id}, cfg, threads, out_dir);
}

}  // namespace ammfee
