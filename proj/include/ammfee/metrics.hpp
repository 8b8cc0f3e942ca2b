#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ammfee/fee_policy.hpp"
#include "ammfee/simulator.hpp"

namespace ammfee {

// Numerator per trade is (exec - Z) size for buys and (Z - exec) size for
// sells, which splits into the convexity charge |Z_pool - Z| size plus the fee
// cash. The denominator is the traded size in Y.
struct SlippageReport {
    Estimate avg_slippage;          // mean over paths of the per-path ratio
    double ratio_of_means = 0.0;    // mean numerator / mean denominator
    double numerator = 0.0;         // per-path means
    double convexity_component = 0.0;
    double fee_component = 0.0;
    double total_size = 0.0;
    double total_volume = 0.0;
    int paths_used = 0;
    int excluded_paths = 0;         // paths without trades
};

SlippageReport avg_slippage(std::span<const std::vector<TradeEvent>> trade_logs);
SlippageReport avg_slippage(const BatchResult& batch);

struct RouteCost {
    std::vector<int> children;  // child trades sent to each venue
    bool feasible = false;
    double cash = 0.0;          // X paid (buy) or received (sell), fees included
    double size = 0.0;          // Y
    double rate = 0.0;          // cash / size
};

struct RoutingReport {
    Side side = Side::buy;
    std::vector<RouteCost> routes;
    std::size_t best = 0;       // index into routes

    const RouteCost& best_route() const { return routes.at(best); }
    bool split() const;         // best route uses more than one venue
};

// A parent trade of `children` one-step child trades, routed over every
// composition across venues. Each child walks its venue's fee-adjusted
// ladder from the snapshot state; rivals stay at the snapshot. Routes that
// would run past a grid edge are infeasible. The best route has the lowest
// rate for a buy and the highest for a sell; throws InputError if no route
// is feasible.
RoutingReport strategic_execution(Side side, int children, std::span<const int> state, int policy_time_index,
                                  const Market& market, std::span<const FeePolicy> policies);

struct BestQuotes {
    std::vector<double> ask;  // per venue, absent sides as +inf
    std::vector<double> bid;  // per venue, absent sides as -inf
    double best_ask = 0.0;
    double best_bid = 0.0;
};

BestQuotes best_quotes(std::span<const int> state, int policy_time_index, const Market& market,
                       std::span<const FeePolicy> policies);

// Per-path average over snapshots of the strategic ask, bid and spread.
struct StrategicSummary {
    Estimate ask, bid, spread;
    int snapshots_used = 0;
    int snapshots_skipped = 0;
};

StrategicSummary strategic_summary(const BatchResult& batch, const SimConfig& cfg, int children);

struct RevenueRow {
    int players = 0;
    double lambda = 0.0;
    Estimate total_fees;
    Estimate venue_revenue;  // take * total fees
    Estimate per_player;     // total fees / players
    Estimate total_volume;
};

constexpr double kVenueTake = 0.10;

RevenueRow revenue_row(const BatchResult& batch, int players, double lambda, double take = kVenueTake);

// Monte Carlo E[min(X, Y)] or E[max(X, Y)] for i.i.d. normals.
Estimate expected_extreme_of_two(double mean, double sd, bool minimum, int samples, std::uint64_t seed);

}  // namespace ammfee
