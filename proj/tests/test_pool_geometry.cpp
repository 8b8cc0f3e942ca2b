#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ammfee/errors.hpp"
#include "ammfee/pool_geometry.hpp"

using namespace ammfee;

namespace {

PoolSpec base_spec() {
    PoolSpec s;
    s.depth_sq = 2.5e7;
    s.grid_halfwidth = 20;
    s.rate_step = 0.1;
    s.center_rate = 100.0;
    return s;
}

// y_j straight from the grid formula
double y_of(double depth_sq, double rate) { return std::sqrt(depth_sq / rate); }

}  // namespace

TEST(PoolGeometry, GridEndpoints) {
    const auto g = build_grid(base_spec());
    EXPECT_NEAR(g.y(0), 500.0, 1e-12);
    EXPECT_NEAR(g.y(20), 505.0763, 1e-4);
    EXPECT_NEAR(g.y(-20), 495.0738, 1e-4);
    EXPECT_DOUBLE_EQ(g.y(20), y_of(2.5e7, 98.0));
    for (int j = -20; j < 20; ++j) EXPECT_LT(g.y(j), g.y(j + 1));
}

TEST(PoolGeometry, MarginalAndSecantRates) {
    const auto g = build_grid(base_spec());
    EXPECT_NEAR(g.z(0), 100.0, 1e-12);
    const double ym1 = y_of(2.5e7, 100.1);
    const double closed = 2.5e7 / (500.0 * ym1);
    EXPECT_NEAR(*g.z_buy(0), closed, 1e-10);
    EXPECT_NEAR(*g.z_buy(0), 100.0500, 1e-4);
    // difference quotient of x = depth/y over the buy step
    const double dq = (2.5e7 / ym1 - 2.5e7 / 500.0) / (500.0 - ym1);
    EXPECT_NEAR(*g.z_buy(0), dq, 1e-8);
    EXPECT_NEAR(*g.z_buy(0), std::sqrt(g.z(0) * g.z(-1)), 1e-10);
    EXPECT_NEAR(*g.delta_buy(0), 500.0 - ym1, 1e-12);
    EXPECT_NEAR(*g.delta_buy(0), 0.24981, 1e-5);
}

TEST(PoolGeometry, LaddersAbsentAtEdges) {
    const auto g = build_grid(base_spec());
    EXPECT_FALSE(g.z_buy(-20).has_value());
    EXPECT_FALSE(g.delta_buy(-20).has_value());
    EXPECT_FALSE(g.z_sell(20).has_value());
    EXPECT_TRUE(g.z_sell(-20).has_value());
    EXPECT_THROW(g.y(21), IndexError);
}

TEST(PoolGeometry, AdjacentStatesShareSecant) {
    const auto g = build_grid(base_spec());
    for (int j = -19; j <= 20; ++j) {
        EXPECT_EQ(*g.z_buy(j), *g.z_sell(j - 1));
        EXPECT_EQ(*g.delta_buy(j), *g.delta_sell(j - 1));
        // buy above marginal, sell below
        EXPECT_GT(*g.z_buy(j), g.z(j));
        EXPECT_LT(*g.z_sell(j - 1), g.z(j - 1));
    }
}

TEST(PoolGeometry, SinglePointGrid) {
    auto s = base_spec();
    s.grid_halfwidth = 0;
    const auto g = build_grid(s);
    EXPECT_EQ(g.size(), 1);
    EXPECT_FALSE(g.z_buy(0).has_value());
    EXPECT_FALSE(g.z_sell(0).has_value());
}

TEST(PoolGeometry, FeeAdjustedQuote) {
    const auto g = build_grid(base_spec());
    const auto zero = fee_adjusted_quote(g, 0, 0.0, 0.0);
    EXPECT_EQ(zero.buy->rate, *g.z_buy(0));
    EXPECT_EQ(zero.sell->rate, *g.z_sell(0));
    const auto q = fee_adjusted_quote(g, 0, 0.01, 0.01);
    EXPECT_NEAR(q.buy->rate, 1.01 * *g.z_buy(0), 1e-12);
    EXPECT_NEAR(q.buy->rate, 101.0505, 1e-4);
    EXPECT_NEAR(q.sell->rate, 0.99 * *g.z_sell(0), 1e-12);
    EXPECT_EQ(q.buy->size, *g.delta_buy(0));
    const auto edge = fee_adjusted_quote(g, -20, 0.01, 0.01);
    EXPECT_FALSE(edge.buy.has_value());
    EXPECT_THROW(edge.leg(Side::buy), BoundaryError);
}

TEST(PoolGeometry, RefinementShrinksSpread) {
    double prev = 1e300;
    for (double step : {0.4, 0.2, 0.1, 0.05, 0.025}) {
        auto s = base_spec();
        s.rate_step = step;
        const auto g = build_grid(s);
        double worst = 0.0;
        for (int j = -19; j <= 20; ++j) worst = std::max(worst, std::abs(*g.z_buy(j) - g.z(j)));
        EXPECT_LT(worst, prev);
        prev = worst;
    }
}

TEST(PoolGeometry, RejectsBadSpecs) {
    auto s = base_spec();
    s.depth_sq = -1.0;
    EXPECT_THROW(build_grid(s), GridError);
    s = base_spec();
    s.rate_step = 5.0;  // center - step * N < 0
    EXPECT_THROW(build_grid(s), GridError);
    s = base_spec();
    s.grid_halfwidth = -1;
    EXPECT_THROW(build_grid(s), GridError);
}

TEST(PoolGeometry, GridCsv) {
    auto s = base_spec();
    s.grid_halfwidth = 1;
    std::ostringstream out;
    write_grid_csv(out, build_grid(s));
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "j,y,x,z,z_buy,z_sell,delta_buy,delta_sell");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
