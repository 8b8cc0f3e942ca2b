#include "ammfee/pool_geometry.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ammfee/errors.hpp"

namespace ammfee {

namespace {

constexpr double kLadderTolerance = 1e-12;

std::string fmt_index(int j) {
    std::ostringstream os;
    os << j;
    return os.str();
}

// Relative error bound of the difference quotient (x_lo - x_hi) / (y_hi - y_lo)
// from cancellation in numerator and denominator.
double quotient_condition(double x_lo, double x_hi, double y_lo, double y_hi) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double dx = std::abs(x_lo - x_hi);
    const double dy = std::abs(y_hi - y_lo);
    return 4.0 * eps * ((std::abs(x_lo) + std::abs(x_hi)) / dx + (std::abs(y_lo) + std::abs(y_hi)) / dy);
}

double ladder_rate(const LevelFunction& level, double y_lo, double y_hi, int k) {
    const double x_lo = level.value(y_lo);
    const double x_hi = level.value(y_hi);
    const double quotient = (x_lo - x_hi) / (y_hi - y_lo);
    const auto closed = level.secant_rate(y_lo, y_hi);
    if (!closed) {
        return quotient;
    }
    const double tol = kLadderTolerance + quotient_condition(x_lo, x_hi, y_lo, y_hi);
    if (!(std::abs(quotient - *closed) <= tol * std::abs(*closed))) {
        throw GridError("ladder rate between grid indices " + fmt_index(k) + " and " + fmt_index(k + 1) +
                        ": difference quotient and closed form disagree");
    }
    return *closed;
}

}  // namespace

ConstantProductLevel::ConstantProductLevel(double depth_sq) : depth_sq_(depth_sq) {
    if (!(depth_sq > 0.0) || !std::isfinite(depth_sq)) {
        throw GridError("constant-product depth must be positive and finite");
    }
}

double ConstantProductLevel::inventory_at_rate(double rate) const {
    return std::sqrt(depth_sq_ / rate);
}

void PoolSpec::validate() const {
    if (!(depth_sq > 0.0) || !std::isfinite(depth_sq)) {
        throw GridError("depth_sq must be positive and finite");
    }
    if (grid_halfwidth < 0) {
        throw GridError("grid_halfwidth must be non-negative");
    }
    if (!(rate_step > 0.0) || !std::isfinite(rate_step)) {
        throw GridError("rate_step must be positive and finite");
    }
    if (!(center_rate > 0.0) || !std::isfinite(center_rate)) {
        throw GridError("center_rate must be positive and finite");
    }
}

void to_json(nlohmann::json& j, const PoolSpec& spec) {
    j = nlohmann::json{{"depth_sq", spec.depth_sq},
                       {"kind", "constant_product"},
                       {"grid_halfwidth", spec.grid_halfwidth},
                       {"rate_step", spec.rate_step},
                       {"center_rate", spec.center_rate}};
}

void from_json(const nlohmann::json& j, PoolSpec& spec) {
    spec = PoolSpec{};
    j.at("depth_sq").get_to(spec.depth_sq);
    if (j.contains("kind")) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind != "constant_product") {
            throw ConfigError("unsupported trading function kind '" + kind + "'");
        }
    }
    if (j.contains("grid_halfwidth")) j.at("grid_halfwidth").get_to(spec.grid_halfwidth);
    if (j.contains("rate_step")) j.at("rate_step").get_to(spec.rate_step);
    if (j.contains("center_rate")) j.at("center_rate").get_to(spec.center_rate);
}

std::shared_ptr<const LevelFunction> make_level_function(const PoolSpec& spec) {
    switch (spec.kind) {
        case TradingFunctionKind::constant_product:
            return std::make_shared<ConstantProductLevel>(spec.depth_sq);
    }
    throw GridError("unknown trading function kind");
}

const QuoteLeg& FeeAdjustedQuote::leg(Side side) const {
    const auto& l = side == Side::buy ? buy : sell;
    if (!l) {
        throw BoundaryError(std::string("no ") + to_string(side) + " quote at the grid boundary");
    }
    return *l;
}

InventoryGrid build_grid(const PoolSpec& spec) {
    spec.validate();
    const int n = spec.grid_halfwidth;
    const auto level = make_level_function(spec);

    InventoryGrid grid;
    grid.spec_ = spec;
    grid.n_ = n;
    const auto rate_at = [&](int j) { return spec.center_rate - spec.rate_step * j; };

    for (int j = -n; j <= n; ++j) {
        const double rate = rate_at(j);
        if (!(rate > 0.0)) {
            throw GridError("non-positive marginal rate at grid index " + fmt_index(j));
        }
        const double y = level->inventory_at_rate(rate);
        grid.y_.push_back(y);
        grid.x_.push_back(level->value(y));
        grid.z_.push_back(-level->derivative(y));
    }
    for (std::size_t i = 1; i < grid.y_.size(); ++i) {
        if (!(grid.y_[i] > grid.y_[i - 1]) || !(grid.x_[i] < grid.x_[i - 1])) {
            throw GridError("grid not monotone at index " + fmt_index(static_cast<int>(i) - n));
        }
    }
    for (int k = -n; k < n; ++k) {
        const double y_lo = grid.y_[static_cast<std::size_t>(k + n)];
        const double y_hi = grid.y_[static_cast<std::size_t>(k + n + 1)];
        grid.secant_.push_back(ladder_rate(*level, y_lo, y_hi, k));
        grid.step_.push_back(y_hi - y_lo);
    }

    // Ghost states one step beyond each edge.
    {
        const double y_ghost = level->inventory_at_rate(rate_at(-n - 1));
        const double y_edge = grid.y_.front();
        grid.ghost_secant_lo_ = ladder_rate(*level, y_ghost, y_edge, -n - 1);
        grid.ghost_step_lo_ = y_edge - y_ghost;
    }
    if (rate_at(n + 1) > 0.0) {
        const double y_ghost = level->inventory_at_rate(rate_at(n + 1));
        const double y_edge = grid.y_.back();
        grid.ghost_secant_hi_ = ladder_rate(*level, y_edge, y_ghost, n);
        grid.ghost_step_hi_ = y_ghost - y_edge;
    }

    for (int j = -n; j <= n; ++j) {
        const auto buy = grid.extended_secant(j - 1);
        const auto sell = grid.extended_secant(j);
        grid.rival_buy_.push_back(buy ? *buy : grid.z(j));
        grid.rival_sell_.push_back(sell ? *sell : grid.z(j));
    }
    return grid;
}

void InventoryGrid::check_index(int j) const {
    if (!contains(j)) {
        throw IndexError("grid index " + fmt_index(j) + " outside [-" + fmt_index(n_) + ", " + fmt_index(n_) + "]");
    }
}

double InventoryGrid::y(int j) const {
    check_index(j);
    return y_[static_cast<std::size_t>(j + n_)];
}

double InventoryGrid::x(int j) const {
    check_index(j);
    return x_[static_cast<std::size_t>(j + n_)];
}

double InventoryGrid::z(int j) const {
    check_index(j);
    return z_[static_cast<std::size_t>(j + n_)];
}

std::optional<double> InventoryGrid::z_buy(int j) const {
    check_index(j);
    if (j == -n_) return std::nullopt;
    return secant(j - 1);
}

std::optional<double> InventoryGrid::z_sell(int j) const {
    check_index(j);
    if (j == n_) return std::nullopt;
    return secant(j);
}

std::optional<double> InventoryGrid::delta_buy(int j) const {
    check_index(j);
    if (j == -n_) return std::nullopt;
    return step(j - 1);
}

std::optional<double> InventoryGrid::delta_sell(int j) const {
    check_index(j);
    if (j == n_) return std::nullopt;
    return step(j);
}

std::optional<double> InventoryGrid::extended_secant(int k) const {
    if (k < -n_ - 1 || k > n_) {
        throw IndexError("extended ladder index " + fmt_index(k) + " out of range");
    }
    if (k == -n_ - 1) return ghost_secant_lo_;
    if (k == n_) return ghost_secant_hi_;
    return secant(k);
}

std::optional<double> InventoryGrid::extended_step(int k) const {
    if (k < -n_ - 1 || k > n_) {
        throw IndexError("extended ladder index " + fmt_index(k) + " out of range");
    }
    if (k == -n_ - 1) return ghost_step_lo_;
    if (k == n_) return ghost_step_hi_;
    return step(k);
}

double InventoryGrid::rival_rate(Side side, int j) const {
    check_index(j);
    const auto i = static_cast<std::size_t>(j + n_);
    return side == Side::buy ? rival_buy_[i] : rival_sell_[i];
}

ExchangeRates exchange_rates(const InventoryGrid& grid, int j) {
    return ExchangeRates{grid.z(j), grid.z_buy(j), grid.z_sell(j)};
}

FeeAdjustedQuote fee_adjusted_quote(const InventoryGrid& grid, int j, double buy_fee, double sell_fee) {
    if (!std::isfinite(buy_fee) || !std::isfinite(sell_fee)) {
        throw InputError("fees must be finite");
    }
    FeeAdjustedQuote quote;
    if (const auto zb = grid.z_buy(j)) {
        quote.buy = QuoteLeg{(1.0 + buy_fee) * *zb, *grid.delta_buy(j)};
    }
    if (const auto zs = grid.z_sell(j)) {
        quote.sell = QuoteLeg{(1.0 - sell_fee) * *zs, *grid.delta_sell(j)};
    }
    return quote;
}

void write_grid_csv(std::ostream& out, const InventoryGrid& grid) {
    const auto put = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << *v;
    };
    const auto old_precision = out.precision(17);
    out << "j,y,x,z,z_buy,z_sell,delta_buy,delta_sell\n";
    for (int j = -grid.halfwidth(); j <= grid.halfwidth(); ++j) {
        out << j << ',' << grid.y(j) << ',' << grid.x(j) << ',' << grid.z(j);
        put(grid.z_buy(j));
        put(grid.z_sell(j));
        put(grid.delta_buy(j));
        put(grid.delta_sell(j));
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace ammfee
