#include "ammfee/equilibrium_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ammfee/errors.hpp"
#include "ammfee/matrix_exponential.hpp"
#include "ammfee/parallel.hpp"

namespace ammfee {

namespace {

constexpr double kMaxExponent = 700.0;

std::string describe_state(int player, int own, std::span<const int> rivals, double exponent) {
    std::ostringstream os;
    os << "player " << player << ", own index " << own << ", rivals (";
    for (std::size_t r = 0; r < rivals.size(); ++r) os << (r ? "," : "") << rivals[r];
    os << "), exponent " << exponent;
    return os.str();
}

double checked_exp(double exponent, int player, int own, std::span<const int> rivals) {
    if (!std::isfinite(exponent) || exponent > kMaxExponent) {
        throw SolverError("generator coefficient overflow at " + describe_state(player, own, rivals, exponent));
    }
    return std::exp(exponent);
}

std::vector<int> rival_venues(int player, int players) {
    std::vector<int> out;
    for (int v = 0; v < players; ++v) {
        if (v != player) out.push_back(v);
    }
    return out;
}

// k0 * s plus the rival terms, summed in ascending order so that the anchor
// does not depend on how the rivals are labelled.
double anchor_for(Side side, int player, std::span<const int> rival_state, double oracle, const Market& market) {
    const auto& flow = market.flow;
    const auto p = static_cast<std::size_t>(player);
    const double s = side == Side::buy ? oracle - flow.zeta : oracle + flow.zeta;
    double anchor = flow.k0[p] * s;
    std::vector<double> terms;
    terms.reserve(rival_state.size());
    std::size_t r = 0;
    for (int v = 0; v < market.players(); ++v) {
        if (v == player) continue;
        const double z = market.grids[static_cast<std::size_t>(v)].rival_rate(side, rival_state[r++]);
        terms.push_back(flow.k_cross[p][static_cast<std::size_t>(v)] * z);
    }
    std::sort(terms.begin(), terms.end());
    for (double t : terms) anchor += t;
    return anchor;
}

std::string generator_key(const GeneratorMatrix& g) {
    std::string key(sizeof(double) * (g.up.size() + g.down.size()) + sizeof(int), '\0');
    char* out = key.data();
    std::memcpy(out, &g.halfwidth, sizeof(int));
    out += sizeof(int);
    std::memcpy(out, g.up.data(), sizeof(double) * g.up.size());
    out += sizeof(double) * g.up.size();
    std::memcpy(out, g.down.data(), sizeof(double) * g.down.size());
    return key;
}

WPath log_of(const WPath& w) {
    WPath out(w.dim(), w.steps());
    for (int k = 0; k <= w.steps(); ++k) {
        const auto src = w.at(k);
        auto dst = out.at(k);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(src[i]);
    }
    return out;
}

std::size_t tuple_count_for(const std::vector<int>& halfwidths) {
    std::size_t count = 1;
    for (int n : halfwidths) count *= static_cast<std::size_t>(2 * n + 1);
    return count;
}

}  // namespace

const char* to_string(GeneratorMode mode) { return mode == GeneratorMode::pde ? "pde" : "strict_theorem"; }

void Market::validate() const {
    if (grids.empty()) throw InputError("market needs at least one pool");
    flow.validate();
    if (flow.venues() != players()) throw InputError("flow parameters and pools disagree on the number of venues");
}

Eigen::MatrixXd GeneratorMatrix::dense() const {
    const int n = dim();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) a(i, i + 1) = up[static_cast<std::size_t>(i)];
        if (i > 0) a(i, i - 1) = down[static_cast<std::size_t>(i)];
    }
    return a;
}

GeneratorMatrix build_generator(int player, std::span<const int> rival_state, double oracle, const Market& market,
                                GeneratorMode mode) {
    if (player < 0 || player >= market.players()) throw IndexError("player index out of range");
    if (static_cast<int>(rival_state.size()) != market.players() - 1) {
        throw InputError("rival state needs one index per rival");
    }
    {
        std::size_t r = 0;
        for (int v = 0; v < market.players(); ++v) {
            if (v == player) continue;
            if (!market.grids[static_cast<std::size_t>(v)].contains(rival_state[r++])) {
                throw IndexError("rival state index out of range");
            }
        }
    }
    if (!std::isfinite(oracle)) throw InputError("oracle value must be finite");

    const auto p = static_cast<std::size_t>(player);
    const auto& grid = market.grids[p];
    const auto& flow = market.flow;
    const double k = flow.k_total(player);
    const double a_buy = anchor_for(Side::buy, player, rival_state, oracle, market);
    const double a_sell = anchor_for(Side::sell, player, rival_state, oracle, market);

    GeneratorMatrix g;
    g.halfwidth = grid.halfwidth();
    g.player = player;
    g.rival_state.assign(rival_state.begin(), rival_state.end());
    g.oracle = oracle;
    const int n = grid.halfwidth();
    g.up.assign(static_cast<std::size_t>(g.dim()), 0.0);
    g.down.assign(static_cast<std::size_t>(g.dim()), 0.0);

    for (int j = -n; j <= n; ++j) {
        const auto i = static_cast<std::size_t>(j + n);
        if (j < n) {
            // Ladder index of the sell trade out of state j (pde) or j+1 (strict).
            const int ladder = mode == GeneratorMode::pde ? j : j + 1;
            const auto rate = grid.extended_secant(ladder);
            const auto size = grid.extended_step(ladder);
            if (!rate || !size) {
                throw SolverError("strict-theorem generator needs a ghost state above index " + std::to_string(n));
            }
            const double exponent = *size * (k * *rate - a_sell) - 1.0;
            g.up[i] = flow.lambda_sell[p] * checked_exp(exponent, player, j, rival_state);
        }
        if (j > -n) {
            const int ladder = mode == GeneratorMode::pde ? j - 1 : j - 2;
            const auto rate = grid.extended_secant(ladder);
            const auto size = grid.extended_step(ladder);
            if (!rate || !size) {
                throw SolverError("strict-theorem generator needs a ghost state below index " + std::to_string(-n));
            }
            const double exponent = *size * (a_buy - k * *rate) - 1.0;
            g.down[i] = flow.lambda_buy[p] * checked_exp(exponent, player, j, rival_state);
        }
    }
    return g;
}

WPath solve_w(const GeneratorMatrix& generator, const TimeGrid& time) {
    if (time.steps < 1 || !(time.horizon > 0.0)) throw InputError("time grid needs a positive horizon and steps");
    const int n = generator.dim();
    WPath w(n, time.steps);
    auto terminal = w.at(time.steps);
    std::fill(terminal.begin(), terminal.end(), 1.0);

    const Eigen::MatrixXd step = matrix_exponential(generator.dense() * time.dt());
    for (int k = time.steps - 1; k >= 0; --k) {
        Eigen::Map<const Eigen::VectorXd> next(w.at(k + 1).data(), n);
        Eigen::Map<Eigen::VectorXd> cur(w.at(k).data(), n);
        cur.noalias() = step * next;
    }
    for (double v : w.data()) {
        if (!std::isfinite(v)) {
            throw SolverError("non-finite w for player " + std::to_string(generator.player) +
                              "; horizon too long for the flow parameters");
        }
    }
    return w;
}

WSurface::WSurface(int player, TimeGrid time, double k_total, int own_halfwidth, std::vector<int> rival_halfwidths,
                   std::shared_ptr<const std::vector<Family>> families, std::vector<std::int32_t> family_of_tuple)
    : player_(player),
      time_(time),
      k_total_(k_total),
      own_halfwidth_(own_halfwidth),
      rival_halfwidths_(std::move(rival_halfwidths)),
      families_(std::move(families)),
      family_of_tuple_(std::move(family_of_tuple)) {
    if (family_of_tuple_.size() != tuple_count_for(rival_halfwidths_)) {
        throw InputError("surface tuple map has the wrong size");
    }
}

std::size_t WSurface::tuple_index(std::span<const int> rival_state) const {
    if (rival_state.size() != rival_halfwidths_.size()) throw IndexError("rival state has the wrong length");
    for (std::size_t r = 0; r < rival_state.size(); ++r) {
        if (rival_state[r] < -rival_halfwidths_[r] || rival_state[r] > rival_halfwidths_[r]) {
            throw IndexError("rival state index out of range");
        }
    }
    return tuple_index_unchecked(rival_state);
}

std::vector<int> WSurface::tuple_state(std::size_t tuple) const {
    std::vector<int> state(rival_halfwidths_.size());
    for (std::size_t r = rival_halfwidths_.size(); r-- > 0;) {
        const auto width = static_cast<std::size_t>(2 * rival_halfwidths_[r] + 1);
        state[r] = static_cast<int>(tuple % width) - rival_halfwidths_[r];
        tuple /= width;
    }
    return state;
}

double WSurface::w(int time_index, int own, std::span<const int> rival_state) const {
    if (time_index < 0 || time_index > time_.steps) throw IndexError("time index out of range");
    if (own < -own_halfwidth_ || own > own_halfwidth_) throw IndexError("own index out of range");
    return family(tuple_index(rival_state)).w.at(time_index)[static_cast<std::size_t>(own + own_halfwidth_)];
}

double WSurface::log_w(int time_index, int own, std::span<const int> rival_state) const {
    if (time_index < 0 || time_index > time_.steps) throw IndexError("time index out of range");
    if (own < -own_halfwidth_ || own > own_halfwidth_) throw IndexError("own index out of range");
    return family(tuple_index(rival_state)).log_w.at(time_index)[static_cast<std::size_t>(own + own_halfwidth_)];
}

EquilibriumSolution solve_equilibrium(const Market& market, const SolverSettings& settings) {
    market.validate();
    const int m = market.players();

    // Build every generator, dedupe on exact coefficients, then solve the
    // distinct ones in parallel.
    std::vector<GeneratorMatrix> distinct;
    std::unordered_map<std::string, std::int32_t> index_of;
    std::vector<std::vector<std::int32_t>> maps(static_cast<std::size_t>(m));
    std::vector<std::vector<int>> rival_widths(static_cast<std::size_t>(m));

    for (int h = 0; h < m; ++h) {
        for (int v : rival_venues(h, m)) rival_widths[static_cast<std::size_t>(h)].push_back(market.grids[static_cast<std::size_t>(v)].halfwidth());
        const auto& widths = rival_widths[static_cast<std::size_t>(h)];
        const std::size_t count = tuple_count_for(widths);
        auto& map = maps[static_cast<std::size_t>(h)];
        map.resize(count);
        std::vector<int> state(widths.size());
        for (std::size_t t = 0; t < count; ++t) {
            std::size_t rem = t;
            for (std::size_t r = widths.size(); r-- > 0;) {
                const auto width = static_cast<std::size_t>(2 * widths[r] + 1);
                state[r] = static_cast<int>(rem % width) - widths[r];
                rem /= width;
            }
            auto g = build_generator(h, state, settings.oracle, market, settings.mode);
            auto key = generator_key(g);
            auto [it, inserted] = index_of.emplace(std::move(key), static_cast<std::int32_t>(distinct.size()));
            if (inserted) distinct.push_back(std::move(g));
            map[t] = it->second;
        }
    }

    auto families = std::make_shared<std::vector<WSurface::Family>>(distinct.size());
    parallel_for(distinct.size(), settings.threads, [&](std::size_t i) {
        auto& fam = (*families)[i];
        fam.w = solve_w(distinct[i], settings.time);
        fam.log_w = log_of(fam.w);
        fam.generator = std::move(distinct[i]);
    });

    EquilibriumSolution solution;
    solution.settings = settings;
    for (int h = 0; h < m; ++h) {
        const auto hh = static_cast<std::size_t>(h);
        solution.surfaces.push_back(std::make_shared<const WSurface>(
            h, settings.time, market.flow.k_total(h), market.grids[hh].halfwidth(), rival_widths[hh], families,
            std::move(maps[hh])));
    }
    return solution;
}

EquilibriumSolution solve_two_player(const Market& market, const SolverSettings& settings) {
    market.validate();
    if (market.players() != 2) throw InputError("two-player solver needs exactly two pools");

    EquilibriumSolution solution;
    solution.settings = settings;
    for (int h = 0; h < 2; ++h) {
        const auto& rival_grid = market.grids[static_cast<std::size_t>(1 - h)];
        const int rn = rival_grid.halfwidth();
        auto families = std::make_shared<std::vector<WSurface::Family>>(static_cast<std::size_t>(2 * rn + 1));
        parallel_for(families->size(), settings.threads, [&](std::size_t i) {
            const int opponent[1] = {static_cast<int>(i) - rn};
            auto& fam = (*families)[i];
            fam.generator = build_generator(h, opponent, settings.oracle, market, settings.mode);
            fam.w = solve_w(fam.generator, settings.time);
            fam.log_w = log_of(fam.w);
        });
        std::vector<std::int32_t> map(families->size());
        for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<std::int32_t>(i);
        solution.surfaces.push_back(std::make_shared<const WSurface>(
            h, settings.time, market.flow.k_total(h), market.grids[static_cast<std::size_t>(h)].halfwidth(),
            std::vector<int>{rn}, std::move(families), std::move(map)));
    }
    return solution;
}

std::optional<double> equilibrium_fee(const WSurface& surface, const InventoryGrid& own_grid, Side side,
                                      int time_index, int own, std::span<const int> rival_state) {
    if (own_grid.halfwidth() != surface.own_halfwidth()) throw InputError("grid does not match the surface");
    const double lw = surface.log_w(time_index, own, rival_state);
    const double k = surface.k_total();
    if (side == Side::buy) {
        if (own == -own_grid.halfwidth()) return std::nullopt;
        const double lw_next = surface.log_w(time_index, own - 1, rival_state);
        return (1.0 + (lw - lw_next)) / (k * own_grid.secant(own - 1) * own_grid.step(own - 1));
    }
    if (own == own_grid.halfwidth()) return std::nullopt;
    const double lw_next = surface.log_w(time_index, own + 1, rival_state);
    return (1.0 + (lw - lw_next)) / (k * own_grid.secant(own) * own_grid.step(own));
}

double hjb_residual(const GeneratorMatrix& generator, const WPath& w, const TimeGrid& time) {
    if (w.dim() != generator.dim() || w.steps() != time.steps) throw InputError("w path does not match generator");
    const int n = generator.dim();
    const double dt = time.dt();
    double worst = 0.0;
    for (int k = 1; k < time.steps; ++k) {
        const auto prev = w.at(k - 1);
        const auto cur = w.at(k);
        const auto next = w.at(k + 1);
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double dwdt = (next[ii] - prev[ii]) / (2.0 * dt);
            double r = dwdt;
            if (i > 0) r += generator.down[ii] * cur[ii - 1];
            if (i + 1 < n) r += generator.up[ii] * cur[ii + 1];
            worst = std::max(worst, std::abs(r) / std::max(1.0, std::abs(dwdt)));
        }
    }
    return worst;
}

double hjb_residual(const WSurface& surface) {
    double worst = 0.0;
    for (std::size_t t = 0; t < surface.tuple_count(); ++t) {
        const auto& fam = surface.family(t);
        worst = std::max(worst, hjb_residual(fam.generator, fam.w, surface.time_grid()));
    }
    return worst;
}

double value_function(const WSurface& surface, int time_index, int own, std::span<const int> rival_state,
                      double cash) {
    return value_function(surface.w(time_index, own, rival_state), cash, surface.k_total());
}

}  // namespace ammfee
