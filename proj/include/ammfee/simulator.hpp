#pragma once

#include <cstdint>
#include <vector>

#include "ammfee/equilibrium_solver.hpp"
#include "ammfee/fee_policy.hpp"
#include "ammfee/market_model.hpp"
#include "ammfee/time_grid.hpp"

namespace ammfee {

struct SimConfig {
    TimeGrid time{1.0, 1000};
    int n_paths = 100000;
    std::uint64_t seed = 1;
    Market market;
    OracleSpec oracle;
    std::vector<FeePolicy> policies;  // one per venue, in venue order
    std::vector<int> initial_state;   // empty means every venue at index 0
    std::vector<double> snapshot_times;
    bool record_trades = false;
    int threads = 0;

    // Throws ConfigError if a policy cannot serve every reachable state.
    void validate() const;
};

struct TradeEvent {
    double time = 0.0;
    int venue = 0;
    Side side = Side::buy;
    int state_before = 0;  // own grid index before the trade
    double size = 0.0;       // Y
    double exec_rate = 0.0;  // fee-adjusted
    double pool_rate = 0.0;  // fee-free Z_- or Z_+
    double mid_rate = 0.0;   // marginal Z before the trade
    double fee = 0.0;
    double fee_cash = 0.0;
};

struct VenuePathStats {
    double fees = 0.0;
    int n_buy = 0;
    int n_sell = 0;
    double volume = 0.0;      // sum of fee-free Z times size
    double size = 0.0;        // sum of trade sizes, Y
    double convexity = 0.0;   // sum |pool rate - Z| * size
    int boundary_hits = 0;    // arrivals at an edge of the grid
    int terminal_index = 0;
};

struct Snapshot {
    int time_index = 0;              // simulation step
    std::vector<int> state;          // one index per venue
};

struct PathResult {
    std::vector<VenuePathStats> venues;
    std::vector<Snapshot> snapshots;
    std::vector<TradeEvent> trades;  // only with record_trades

    double total_fees() const;
    double total_volume() const;
    double total_size() const;
    double total_convexity() const;
};

PathResult simulate_path(const SimConfig& cfg, std::uint64_t path_index);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

// Mean and standard error of a sample, summed in order.
Estimate estimate(const std::vector<double>& sample);

struct VenueAggregate {
    Estimate fees, n_buy, n_sell, volume, boundary_hits;
};

struct BatchResult {
    int n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<VenueAggregate> venues;
    Estimate total_fees;
    Estimate total_volume;
    std::vector<PathResult> paths;  // per path, in path order
};

BatchResult run_batch(const SimConfig& cfg);

}  // namespace ammfee
