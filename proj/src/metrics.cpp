#include "ammfee/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ammfee/errors.hpp"

namespace ammfee {

namespace {

struct PathSlippage {
    double numerator = 0.0;
    double convexity = 0.0;
    double fees = 0.0;
    double size = 0.0;
    double volume = 0.0;
};

SlippageReport summarise(const std::vector<PathSlippage>& paths) {
    SlippageReport rep;
    std::vector<double> ratios;
    double num = 0.0, conv = 0.0, fees = 0.0, size = 0.0, vol = 0.0;
    for (const auto& p : paths) {
        num += p.numerator;
        conv += p.convexity;
        fees += p.fees;
        size += p.size;
        vol += p.volume;
        if (p.size > 0.0) {
            ratios.push_back(p.numerator / p.size);
        } else {
            ++rep.excluded_paths;
        }
    }
    const double n = paths.empty() ? 1.0 : static_cast<double>(paths.size());
    rep.avg_slippage = estimate(ratios);
    rep.paths_used = static_cast<int>(ratios.size());
    rep.numerator = num / n;
    rep.convexity_component = conv / n;
    rep.fee_component = fees / n;
    rep.total_size = size / n;
    rep.total_volume = vol / n;
    rep.ratio_of_means = size > 0.0 ? num / size : 0.0;
    return rep;
}

}  // namespace

SlippageReport avg_slippage(std::span<const std::vector<TradeEvent>> trade_logs) {
    std::vector<PathSlippage> paths;
    paths.reserve(trade_logs.size());
    for (const auto& log : trade_logs) {
        PathSlippage p;
        for (const auto& t : log) {
            const double dev = t.side == Side::buy ? t.exec_rate - t.mid_rate : t.mid_rate - t.exec_rate;
            p.numerator += dev * t.size;
            p.convexity += std::abs(t.pool_rate - t.mid_rate) * t.size;
            p.fees += t.fee_cash;
            p.size += t.size;
            p.volume += t.pool_rate * t.size;
        }
        paths.push_back(p);
    }
    return summarise(paths);
}

SlippageReport avg_slippage(const BatchResult& batch) {
    std::vector<PathSlippage> paths;
    paths.reserve(batch.paths.size());
    for (const auto& r : batch.paths) {
        PathSlippage p;
        p.convexity = r.total_convexity();
        p.fees = r.total_fees();
        p.numerator = p.convexity + p.fees;
        p.size = r.total_size();
        p.volume = r.total_volume();
        paths.push_back(p);
    }
    return summarise(paths);
}

bool RoutingReport::split() const {
    int used = 0;
    for (int c : best_route().children) used += c > 0;
    return used > 1;
}

namespace {

void compositions(int remaining, std::size_t venue, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (venue + 1 == current.size()) {
        current[venue] = remaining;
        out.push_back(current);
        return;
    }
    for (int c = remaining; c >= 0; --c) {
        current[venue] = c;
        compositions(remaining - c, venue + 1, current, out);
    }
}

std::vector<int> rivals_of(std::span<const int> state, std::size_t venue) {
    std::vector<int> r;
    for (std::size_t o = 0; o < state.size(); ++o) {
        if (o != venue) r.push_back(state[o]);
    }
    return r;
}

void check_snapshot(std::span<const int> state, const Market& market, std::span<const FeePolicy> policies) {
    if (static_cast<int>(state.size()) != market.players() || policies.size() != state.size()) {
        throw InputError("snapshot, market and policies disagree on the number of venues");
    }
    for (std::size_t v = 0; v < state.size(); ++v) {
        if (!market.grids[v].contains(state[v])) throw IndexError("snapshot state outside the grid");
    }
}

}  // namespace

RoutingReport strategic_execution(Side side, int children, std::span<const int> state, int policy_time_index,
                                  const Market& market, std::span<const FeePolicy> policies) {
    check_snapshot(state, market, policies);
    if (children < 1) throw InputError("a parent trade needs at least one child trade");
    RoutingReport rep;
    rep.side = side;
    std::vector<int> current(state.size());
    std::vector<std::vector<int>> routes;
    compositions(children, 0, current, routes);

    bool any = false;
    for (auto& split : routes) {
        RouteCost rc;
        rc.children = split;
        rc.feasible = true;
        for (std::size_t v = 0; v < state.size() && rc.feasible; ++v) {
            const auto& grid = market.grids[v];
            const auto rivals = rivals_of(state, v);
            int j = state[v];
            for (int c = 0; c < split[v]; ++c) {
                const auto fee = policies[v].fee(side, policy_time_index, j, rivals);
                if (!fee) {
                    rc.feasible = false;
                    break;
                }
                const int ladder = side == Side::buy ? j - 1 : j;
                const double z = grid.secant(ladder);
                const double dy = grid.step(ladder);
                rc.cash += (side == Side::buy ? 1.0 + *fee : 1.0 - *fee) * z * dy;
                rc.size += dy;
                j += side == Side::buy ? -1 : 1;
            }
        }
        if (rc.feasible) {
            rc.rate = rc.cash / rc.size;
            const bool better = !any || (side == Side::buy ? rc.rate < rep.routes[rep.best].rate
                                                           : rc.rate > rep.routes[rep.best].rate);
            if (better) rep.best = rep.routes.size();
            any = true;
        }
        rep.routes.push_back(std::move(rc));
    }
    if (!any) throw InputError("no feasible route: parent trade exceeds the available ladder depth");
    return rep;
}

BestQuotes best_quotes(std::span<const int> state, int policy_time_index, const Market& market,
                       std::span<const FeePolicy> policies) {
    check_snapshot(state, market, policies);
    BestQuotes q;
    q.best_ask = std::numeric_limits<double>::infinity();
    q.best_bid = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < state.size(); ++v) {
        const auto rivals = rivals_of(state, v);
        const auto& grid = market.grids[v];
        double ask = std::numeric_limits<double>::infinity();
        double bid = -std::numeric_limits<double>::infinity();
        if (const auto m = policies[v].buy_fee(policy_time_index, state[v], rivals)) {
            ask = (1.0 + *m) * *grid.z_buy(state[v]);
        }
        if (const auto p = policies[v].sell_fee(policy_time_index, state[v], rivals)) {
            bid = (1.0 - *p) * *grid.z_sell(state[v]);
        }
        q.ask.push_back(ask);
        q.bid.push_back(bid);
        q.best_ask = std::min(q.best_ask, ask);
        q.best_bid = std::max(q.best_bid, bid);
    }
    return q;
}

StrategicSummary strategic_summary(const BatchResult& batch, const SimConfig& cfg, int children) {
    StrategicSummary out;
    std::vector<double> asks, bids, spreads;
    for (const auto& path : batch.paths) {
        double ask = 0.0, bid = 0.0;
        int used = 0;
        for (const auto& snap : path.snapshots) {
            const double t = cfg.time.time(snap.time_index);
            const int ti = cfg.policies.front().time_grid().index_at(t);
            try {
                const auto b = strategic_execution(Side::buy, children, snap.state, ti, cfg.market, cfg.policies);
                const auto s = strategic_execution(Side::sell, children, snap.state, ti, cfg.market, cfg.policies);
                ask += b.best_route().rate;
                bid += s.best_route().rate;
                ++used;
            } catch (const InputError&) {
                ++out.snapshots_skipped;
            }
        }
        if (used == 0) continue;
        out.snapshots_used += used;
        asks.push_back(ask / used);
        bids.push_back(bid / used);
        spreads.push_back((ask - bid) / used);
    }
    out.ask = estimate(asks);
    out.bid = estimate(bids);
    out.spread = estimate(spreads);
    return out;
}

RevenueRow revenue_row(const BatchResult& batch, int players, double lambda, double take) {
    if (players < 1) throw InputError("revenue row needs at least one player");
    RevenueRow row;
    row.players = players;
    row.lambda = lambda;
    row.total_fees = batch.total_fees;
    row.venue_revenue = {take * batch.total_fees.mean, take * batch.total_fees.se};
    row.per_player = {batch.total_fees.mean / players, batch.total_fees.se / players};
    row.total_volume = batch.total_volume;
    return row;
}

Estimate expected_extreme_of_two(double mean, double sd, bool minimum, int samples, std::uint64_t seed) {
    if (samples < 2) throw InputError("need at least two samples");
    if (!(sd >= 0.0)) throw InputError("standard deviation must be non-negative");
    PathRng rng(seed, 0);
    std::vector<double> values(static_cast<std::size_t>(samples));
    for (auto& v : values) {
        const double x = mean + sd * rng.normal();
        const double y = mean + sd * rng.normal();
        v = minimum ? std::min(x, y) : std::max(x, y);
    }
    return estimate(values);
}

}  // namespace ammfee
