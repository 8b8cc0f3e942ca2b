#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

namespace ammfee {

enum class Side { buy, sell };

inline const char* to_string(Side side) { return side == Side::buy ? "buy" : "sell"; }

enum class TradingFunctionKind { constant_product };

// Level function x = phi(y) of a constant-function pool, f(phi(y), y) = depth.
class LevelFunction {
public:
    virtual ~LevelFunction() = default;

    virtual double value(double y) const = 0;
    virtual double derivative(double y) const = 0;
    // Inverse of the marginal rate: the y with -phi'(y) == rate.
    virtual double inventory_at_rate(double rate) const = 0;
    // Closed-form average rate of a trade between y_lo and y_hi, when one is known.
    virtual std::optional<double> secant_rate(double y_lo, double y_hi) const {
        (void)y_lo;
        (void)y_hi;
        return std::nullopt;
    }
};

class ConstantProductLevel final : public LevelFunction {
public:
    explicit ConstantProductLevel(double depth_sq);

    double value(double y) const override { return depth_sq_ / y; }
    double derivative(double y) const override { return -depth_sq_ / (y * y); }
    double inventory_at_rate(double rate) const override;
    std::optional<double> secant_rate(double y_lo, double y_hi) const override {
        return depth_sq_ / (y_lo * y_hi);
    }

private:
    double depth_sq_;
};

struct PoolSpec {
    double depth_sq = 2.5e7;  // (p^i)^2, units X*Y
    TradingFunctionKind kind = TradingFunctionKind::constant_product;
    int grid_halfwidth = 20;  // N^i
    double rate_step = 0.1;   // marginal-rate move per grid step, X/Y
    double center_rate = 100.0;

    // Throws GridError naming the first violated invariant.
    void validate() const;
};

void to_json(nlohmann::json& j, const PoolSpec& spec);
void from_json(const nlohmann::json& j, PoolSpec& spec);

std::shared_ptr<const LevelFunction> make_level_function(const PoolSpec& spec);

struct ExchangeRates {
    double z = 0.0;
    std::optional<double> z_buy;
    std::optional<double> z_sell;
};

struct QuoteLeg {
    double rate = 0.0;  // fee-adjusted exchange rate, X/Y
    double size = 0.0;  // Y traded
};

struct FeeAdjustedQuote {
    std::optional<QuoteLeg> buy;
    std::optional<QuoteLeg> sell;

    // Throws BoundaryError if the side does not exist at this state.
    const QuoteLeg& leg(Side side) const;
};

// Inventory ladder y_{-N} < ... < y_N with all exchange-rate ladders
// precomputed. Public accessors take the signed index j in {-N, ..., N}.
//
// Adjacent-state trades share one secant rate: z_buy(j) and z_sell(j-1) are
// the same stored value, as are delta_buy(j) and delta_sell(j-1).
class InventoryGrid {
public:
    InventoryGrid() = default;

    const PoolSpec& spec() const { return spec_; }
    int halfwidth() const { return n_; }
    int size() const { return 2 * n_ + 1; }
    bool contains(int j) const { return j >= -n_ && j <= n_; }

    double y(int j) const;
    double x(int j) const;
    double z(int j) const;
    std::optional<double> z_buy(int j) const;
    std::optional<double> z_sell(int j) const;
    std::optional<double> delta_buy(int j) const;
    std::optional<double> delta_sell(int j) const;

    // Unchecked ladder access for hot loops. secant(k) is the rate of the
    // trade between y_k and y_{k+1}, k in [-N, N-1]; step(k) its size.
    double secant(int k) const { return secant_[static_cast<std::size_t>(k + n_)]; }
    double step(int k) const { return step_[static_cast<std::size_t>(k + n_)]; }
    double marginal(int j) const { return z_[static_cast<std::size_t>(j + n_)]; }

    // Secant ladder extended by one ghost point on each side, k in [-N-1, N].
    // Absent where the ghost state would have a non-positive marginal rate.
    std::optional<double> extended_secant(int k) const;
    std::optional<double> extended_step(int k) const;

    // Fee-free rate this pool contributes to a rival's intensity on `side`:
    // the pool's own buy (sell) rate, continued past the edge with the ghost
    // secant, falling back to the marginal rate if no ghost exists.
    double rival_rate(Side side, int j) const;

    friend InventoryGrid build_grid(const PoolSpec& spec);

private:
    void check_index(int j) const;

    PoolSpec spec_;
    int n_ = 0;
    std::vector<double> y_;
    std::vector<double> x_;
    std::vector<double> z_;
    std::vector<double> secant_;  // 2N entries
    std::vector<double> step_;    // 2N entries
    std::optional<double> ghost_secant_lo_;
    std::optional<double> ghost_step_lo_;
    std::optional<double> ghost_secant_hi_;
    std::optional<double> ghost_step_hi_;
    std::vector<double> rival_buy_;
    std::vector<double> rival_sell_;
};

// Throws GridError if any grid rate is non-positive or the closed-form and
// difference-quotient constructions of a ladder rate disagree.
InventoryGrid build_grid(const PoolSpec& spec);

ExchangeRates exchange_rates(const InventoryGrid& grid, int j);

FeeAdjustedQuote fee_adjusted_quote(const InventoryGrid& grid, int j, double buy_fee, double sell_fee);

// Columns: j,y,x,z,z_buy,z_sell,delta_buy,delta_sell (absent ladder values empty).
void write_grid_csv(std::ostream& out, const InventoryGrid& grid);

}  // namespace ammfee
