#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ammfee/errors.hpp"
#include "ammfee/fee_policy.hpp"

using namespace ammfee;

namespace {

Market duopoly() {
    Market m;
    m.grids = {build_grid(PoolSpec{}), build_grid(PoolSpec{})};
    m.flow = FlowParams::symmetric(2, 50.0, 2.0, 2.0);
    return m;
}

// Surface whose log w differences make the buy fee a + b j + c l exactly.
std::shared_ptr<const WSurface> affine_buy_surface(const InventoryGrid& grid, int rival_n, double a, double b,
                                                   double c, const TimeGrid& time) {
    const int n = grid.halfwidth();
    const double k = 4.0;
    auto families = std::make_shared<std::vector<WSurface::Family>>();
    std::vector<std::int32_t> of_tuple;
    for (int l = -rival_n; l <= rival_n; ++l) {
        WSurface::Family f;
        f.generator.halfwidth = n;
        f.w = WPath(2 * n + 1, time.steps);
        f.log_w = WPath(2 * n + 1, time.steps);
        for (int kk = 0; kk <= time.steps; ++kk) {
            auto lw = f.log_w.at(kk);
            lw[0] = 0.0;
            for (int j = -n + 1; j <= n; ++j) {
                const double fee = a + b * j + c * l;
                const double d = k * *grid.z_buy(j) * *grid.delta_buy(j);
                lw[static_cast<std::size_t>(j + n)] = lw[static_cast<std::size_t>(j + n - 1)] + fee * d - 1.0;
            }
            auto w = f.w.at(kk);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(lw[i]);
        }
        of_tuple.push_back(static_cast<std::int32_t>(families->size()));
        families->push_back(std::move(f));
    }
    return std::make_shared<const WSurface>(0, time, k, n, std::vector<int>{rival_n}, families, of_tuple);
}

}  // namespace

TEST(FeePolicy, EquilibriumPolicyMatchesSolverFee) {
    const auto m = duopoly();
    SolverSettings st;
    st.time = TimeGrid{1.0, 200};
    const auto sol = solve_two_player(m, st);
    const auto p = equilibrium_policy(sol.surfaces[0], m.grids[0]);
    for (int j : {-19, -3, 0, 8, 19}) {
        for (int l : {-20, 0, 20}) {
            const int r[1] = {l};
            EXPECT_EQ(*p.buy_fee(100, j, r), *equilibrium_fee(*sol.surfaces[0], m.grids[0], Side::buy, 100, j, r));
            EXPECT_EQ(*p.sell_fee(100, j, r), *equilibrium_fee(*sol.surfaces[0], m.grids[0], Side::sell, 100, j, r));
        }
    }
    const int r0[1] = {0};
    EXPECT_FALSE(p.buy_fee(0, -20, r0).has_value());
    EXPECT_FALSE(p.sell_fee(0, 20, r0).has_value());
}

TEST(FeePolicy, LinearFitReproducesAffineSurface) {
    PoolSpec s;
    s.grid_halfwidth = 6;
    const auto grid = build_grid(s);
    const TimeGrid time{1.0, 4};
    const auto eq = equilibrium_policy(affine_buy_surface(grid, 3, 0.011, -0.0004, 0.0002, time), grid);
    const auto lin = fit_linear_policy(eq, 2);
    EXPECT_EQ(lin.kind(), PolicyKind::linear);
    for (int k = 0; k <= 4; ++k) {
        const auto& plane = lin.plane(Side::buy, k);
        EXPECT_NEAR(plane.intercept, 0.011, 1e-12);
        EXPECT_NEAR(plane.own_slope, -0.0004, 1e-12);
        EXPECT_NEAR(plane.rival_slopes.at(0), 0.0002, 1e-12);
        for (int j = -5; j <= 6; ++j) {
            for (int l = -3; l <= 3; ++l) {
                const int r[1] = {l};
                EXPECT_NEAR(*lin.buy_fee(k, j, r), *eq.buy_fee(k, j, r), 1e-12);
            }
        }
    }
}

TEST(FeePolicy, LinearFitCloseOnSolvedSurface) {
    const auto m = duopoly();
    SolverSettings st;
    const auto sol = solve_two_player(m, st);
    const auto eq = equilibrium_policy(sol.surfaces[0], m.grids[0]);
    const auto lin = fit_linear_policy(eq, 2);
    const int k = st.time.index_at(0.5);
    const int c[1] = {0};
    const double centre = *eq.buy_fee(k, 0, c);
    double worst = 0.0;
    for (int j = -2; j <= 2; ++j) {
        for (int l = -2; l <= 2; ++l) {
            const int r[1] = {l};
            worst = std::max(worst, std::abs(*lin.buy_fee(k, j, r) - *eq.buy_fee(k, j, r)));
            worst = std::max(worst, std::abs(*lin.sell_fee(k, j, r) - *eq.sell_fee(k, j, r)));
        }
    }
    EXPECT_LT(worst, 0.05 * centre);
}

TEST(FeePolicy, ConstantPolicy) {
    const auto m = duopoly();
    SolverSettings st;
    st.time = TimeGrid{1.0, 200};
    const auto sol = solve_two_player(m, st);
    const auto pa = constant_policy(equilibrium_policy(sol.surfaces[0], m.grids[0]));
    const auto pb = constant_policy(equilibrium_policy(sol.surfaces[1], m.grids[1]));
    EXPECT_EQ(pa.kind(), PolicyKind::constant);
    EXPECT_EQ(pa.constant_value(), pb.constant_value());
    const int r[1] = {3};
    EXPECT_EQ(*pa.buy_fee(7, 5, r), pa.constant_value());
    EXPECT_EQ(*pa.sell_fee(190, -5, r), pa.constant_value());

    PoolSpec s;
    s.grid_halfwidth = 4;
    const auto grid = build_grid(s);
    const TimeGrid time{1.0, 10};
    // buy side flat at 0.01, sell side whatever the log w ladder implies
    const auto eq = equilibrium_policy(affine_buy_surface(grid, 2, 0.01, 0.0, 0.0, time), grid);
    const int c[1] = {0};
    const double expected = 0.5 * (*eq.buy_fee(5, 0, c) + *eq.sell_fee(5, 0, c));
    EXPECT_DOUBLE_EQ(constant_policy(eq).constant_value(), expected);
}

TEST(FeePolicy, FixedFee) {
    const auto p = fixed_fee_policy(0, TimeGrid{1.0, 10}, 3, {3}, 0.0);
    EXPECT_EQ(p.kind(), PolicyKind::zero);
    const int r[1] = {0};
    EXPECT_EQ(*p.buy_fee(3, 0, r), 0.0);
    EXPECT_FALSE(p.buy_fee(3, -3, r).has_value());
    const auto q = fixed_fee_policy(0, TimeGrid{1.0, 10}, 3, {3}, 0.02);
    EXPECT_EQ(q.kind(), PolicyKind::constant);
    EXPECT_EQ(q.constant_value(), 0.02);
}

TEST(FeePolicy, KindNames) {
    EXPECT_EQ(policy_kind_from_string("equilibrium"), PolicyKind::equilibrium);
    EXPECT_EQ(policy_kind_from_string("optimal"), PolicyKind::equilibrium);
    EXPECT_EQ(policy_kind_from_string("linear"), PolicyKind::linear);
    EXPECT_THROW(policy_kind_from_string("greedy"), ConfigError);
}

TEST(FeePolicy, FitRejectsBadWindow) {
    PoolSpec s;
    s.grid_halfwidth = 3;
    const auto grid = build_grid(s);
    const auto eq = equilibrium_policy(affine_buy_surface(grid, 1, 0.01, 0.0, 0.0, TimeGrid{1.0, 2}), grid);
    EXPECT_THROW(fit_linear_policy(eq, 0), InputError);
    EXPECT_THROW(fit_linear_policy(eq, 2), InputError);  // exceeds the rival grid
    EXPECT_THROW(fit_linear_policy(fixed_fee_policy(0, TimeGrid{}, 3, {3}, 0.01), 1), InputError);
}
