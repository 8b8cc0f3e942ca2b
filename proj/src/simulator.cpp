#include "ammfee/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ammfee/errors.hpp"
#include "ammfee/parallel.hpp"

namespace ammfee {

void SimConfig::validate() const {
    if (time.steps < 1 || !(time.horizon > 0.0)) throw ConfigError("simulation needs a positive horizon and steps");
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    try {
        market.validate();
        oracle.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const int m = market.players();
    if (static_cast<int>(policies.size()) != m) throw ConfigError("need one fee policy per venue");
    if (!initial_state.empty()) {
        if (static_cast<int>(initial_state.size()) != m) throw ConfigError("initial state needs one index per venue");
        for (int v = 0; v < m; ++v) {
            if (!market.grids[static_cast<std::size_t>(v)].contains(initial_state[static_cast<std::size_t>(v)])) {
                throw ConfigError("initial state outside the grid of venue " + std::to_string(v));
            }
        }
    }
    for (int v = 0; v < m; ++v) {
        const auto& p = policies[static_cast<std::size_t>(v)];
        const auto tag = " (venue " + std::to_string(v) + ")";
        if (p.player() != v) throw ConfigError("policy is for another player" + tag);
        if (p.own_halfwidth() != market.grids[static_cast<std::size_t>(v)].halfwidth()) {
            throw ConfigError("policy does not cover the venue's grid" + tag);
        }
        std::vector<int> rivals;
        for (int r = 0; r < m; ++r) {
            if (r != v) rivals.push_back(market.grids[static_cast<std::size_t>(r)].halfwidth());
        }
        if (p.rival_halfwidths() != rivals) throw ConfigError("policy does not cover the rival grids" + tag);
        if (p.time_grid().horizon + 1e-12 < time.horizon) throw ConfigError("policy horizon is shorter than the run" + tag);
    }
    for (double t : snapshot_times) {
        if (!(t >= 0.0) || t >= time.horizon) throw ConfigError("snapshot time outside [0, T)");
    }
}

double PathResult::total_fees() const {
    double s = 0.0;
    for (const auto& v : venues) s += v.fees;
    return s;
}

double PathResult::total_volume() const {
    double s = 0.0;
    for (const auto& v : venues) s += v.volume;
    return s;
}

double PathResult::total_size() const {
    double s = 0.0;
    for (const auto& v : venues) s += v.size;
    return s;
}

double PathResult::total_convexity() const {
    double s = 0.0;
    for (const auto& v : venues) s += v.convexity;
    return s;
}

PathResult simulate_path(const SimConfig& cfg, std::uint64_t path_index) {
    const auto& market = cfg.market;
    const auto& flow = market.flow;
    const int m = market.players();
    const auto mm = static_cast<std::size_t>(m);
    const int steps = cfg.time.steps;
    const double dt = cfg.time.dt();

    PathRng rng(cfg.seed, path_index);
    std::vector<double> oracle;
    if (cfg.oracle.mode == OracleMode::arithmetic_brownian && cfg.oracle.sigma > 0.0) {
        oracle = sample_oracle(cfg.oracle, cfg.time.times(), rng);
    }

    std::vector<int> state(mm, 0);
    if (!cfg.initial_state.empty()) state = cfg.initial_state;
    std::vector<int> next_state(mm);
    std::vector<double> k_total(mm);
    for (std::size_t v = 0; v < mm; ++v) k_total[v] = flow.k_total(static_cast<int>(v));

    std::vector<int> snapshot_steps;
    for (double t : cfg.snapshot_times) snapshot_steps.push_back(cfg.time.index_at(t));
    std::size_t next_snapshot = 0;
    std::vector<std::size_t> snapshot_order(snapshot_steps.size());
    for (std::size_t i = 0; i < snapshot_order.size(); ++i) snapshot_order[i] = i;
    std::stable_sort(snapshot_order.begin(), snapshot_order.end(),
                     [&](std::size_t a, std::size_t b) { return snapshot_steps[a] < snapshot_steps[b]; });

    PathResult result;
    result.venues.resize(mm);
    result.snapshots.resize(snapshot_steps.size());
    std::vector<int> rivals(mm > 0 ? mm - 1 : 0);

    for (int k = 0; k < steps; ++k) {
        while (next_snapshot < snapshot_order.size() && snapshot_steps[snapshot_order[next_snapshot]] <= k) {
            result.snapshots[snapshot_order[next_snapshot]] = Snapshot{k, state};
            ++next_snapshot;
        }
        const double t = cfg.time.time(k);
        const double s = oracle.empty() ? cfg.oracle.s0 : oracle[static_cast<std::size_t>(k)];
        next_state = state;
        for (std::size_t v = 0; v < mm; ++v) {
            const auto& grid = market.grids[v];
            const auto& policy = cfg.policies[v];
            const int n = grid.halfwidth();
            const int j = state[v];
            const int ti = policy.time_grid().index_at(t);
            std::size_t r = 0;
            for (std::size_t o = 0; o < mm; ++o) {
                if (o != v) rivals[r++] = state[o];
            }

            for (Side side : {Side::buy, Side::sell}) {
                const double u = rng.uniform();
                const bool quoted = side == Side::buy ? j > -n : j < n;
                if (!quoted) continue;
                const int ladder = side == Side::buy ? j - 1 : j;
                const double z_pool = grid.secant(ladder);
                const double size = grid.step(ladder);
                const double fee = policy.fee_unchecked(side, ti, j, rivals);
                const double rate = side == Side::buy ? (1.0 + fee) * z_pool : (1.0 - fee) * z_pool;

                double anchor = flow.k0[v] * (side == Side::buy ? s - flow.zeta : s + flow.zeta);
                r = 0;
                for (std::size_t o = 0; o < mm; ++o) {
                    if (o == v) continue;
                    anchor += flow.k_cross[v][o] * market.grids[o].rival_rate(side, rivals[r++]);
                }
                const double lambda = side == Side::buy ? flow.lambda_buy[v] : flow.lambda_sell[v];
                const double intensity = intensity_from_anchor(side, lambda, k_total[v], anchor, rate, size);
                if (!std::isfinite(intensity)) {
                    throw SolverError("non-finite intensity at venue " + std::to_string(v) + ", index " +
                                      std::to_string(j));
                }
                if (!(u < -std::expm1(-intensity * dt))) continue;

                auto& st = result.venues[v];
                const double fee_cash = fee * z_pool * size;
                const double mid = grid.z(j);
                st.fees += fee_cash;
                st.volume += z_pool * size;
                st.size += size;
                st.convexity += std::abs(z_pool - mid) * size;
                // a buy and a sell in the same step both fill at the pre-step state and cancel
                const int dest = side == Side::buy ? j - 1 : j + 1;
                if (side == Side::buy) {
                    ++st.n_buy;
                    --next_state[v];
                } else {
                    ++st.n_sell;
                    ++next_state[v];
                }
                if (dest == -n || dest == n) ++st.boundary_hits;
                if (cfg.record_trades) {
                    result.trades.push_back(TradeEvent{t, static_cast<int>(v), side, j, size, rate, z_pool, mid, fee,
                                                       fee_cash});
                }
            }
        }
        state.swap(next_state);
    }
    for (; next_snapshot < snapshot_order.size(); ++next_snapshot) {
        result.snapshots[snapshot_order[next_snapshot]] = Snapshot{steps, state};
    }
    for (std::size_t v = 0; v < mm; ++v) result.venues[v].terminal_index = state[v];
    return result;
}

Estimate estimate(const std::vector<double>& sample) {
    Estimate e;
    if (sample.empty()) return e;
    const double n = static_cast<double>(sample.size());
    double sum = 0.0;
    for (double x : sample) sum += x;
    e.mean = sum / n;
    if (sample.size() > 1) {
        double ss = 0.0;
        for (double x : sample) ss += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

BatchResult run_batch(const SimConfig& cfg) {
    cfg.validate();
    BatchResult out;
    out.n_paths = cfg.n_paths;
    out.seed = cfg.seed;
    out.paths.resize(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(out.paths.size(), cfg.threads,
                 [&](std::size_t i) { out.paths[i] = simulate_path(cfg, static_cast<std::uint64_t>(i)); });

    const auto mm = static_cast<std::size_t>(cfg.market.players());
    std::vector<double> buf(out.paths.size());
    const auto collect = [&](auto&& get) {
        for (std::size_t i = 0; i < out.paths.size(); ++i) buf[i] = get(out.paths[i]);
        return estimate(buf);
    };
    out.venues.resize(mm);
    for (std::size_t v = 0; v < mm; ++v) {
        auto& a = out.venues[v];
        a.fees = collect([&](const PathResult& p) { return p.venues[v].fees; });
        a.n_buy = collect([&](const PathResult& p) { return static_cast<double>(p.venues[v].n_buy); });
        a.n_sell = collect([&](const PathResult& p) { return static_cast<double>(p.venues[v].n_sell); });
        a.volume = collect([&](const PathResult& p) { return p.venues[v].volume; });
        a.boundary_hits = collect([&](const PathResult& p) { return static_cast<double>(p.venues[v].boundary_hits); });
    }
    out.total_fees = collect([](const PathResult& p) { return p.total_fees(); });
    out.total_volume = collect([](const PathResult& p) { return p.total_volume(); });
    return out;
}

}  // namespace ammfee
