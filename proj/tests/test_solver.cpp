#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ammfee/acceptance.hpp"
#include "ammfee/equilibrium_solver.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/fee_policy.hpp"
#include "ammfee/matrix_exponential.hpp"

using namespace ammfee;

namespace {

Market duopoly(double lambda = 50.0, double k0 = 2.0, double kc = 2.0, int n = 20) {
    PoolSpec s;
    s.grid_halfwidth = n;
    Market m;
    m.grids = {build_grid(s), build_grid(s)};
    m.flow = FlowParams::symmetric(2, lambda, k0, kc);
    return m;
}

SolverSettings settings(int steps = 1000) {
    SolverSettings s;
    s.time = TimeGrid{1.0, steps};
    return s;
}

GeneratorMatrix three_state(double c) {
    GeneratorMatrix g;
    g.halfwidth = 1;
    g.up = {c, c, 0.0};
    g.down = {0.0, c, c};
    return g;
}

}  // namespace

TEST(MatrixExponential, MatchesEigenReference) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (double scale : {0.01, 0.5, 3.0, 40.0}) {
        Eigen::MatrixXd a(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) a(i, j) = scale * nd(rng) / 6.0;
        const Eigen::MatrixXd ref = a.exp();
        const Eigen::MatrixXd got = matrix_exponential(a);
        EXPECT_LT((got - ref).norm() / ref.norm(), 1e-12) << "scale " << scale;
        EXPECT_LT((matrix_exponential(a, true) - ref).norm() / ref.norm(), 1e-12);
    }
}

TEST(Solver, SingleStateGrid) {
    auto m = duopoly(50.0, 2.0, 2.0, 0);
    const int rivals[1] = {0};
    const auto g = build_generator(0, rivals, 100.0, m);
    EXPECT_EQ(g.dim(), 1);
    EXPECT_EQ(g.up[0], 0.0);
    EXPECT_EQ(g.down[0], 0.0);
    const auto w = solve_w(g, TimeGrid{1.0, 10});
    for (int k = 0; k <= 10; ++k) EXPECT_EQ(w.at(k)[0], 1.0);
    EXPECT_EQ(value_function(1.0, 3.5, 4.0), 3.5);
}

TEST(Solver, TerminalConditionIsOnes) {
    const auto m = duopoly();
    const int rivals[1] = {4};
    const auto w = solve_w(build_generator(0, rivals, 100.0, m), TimeGrid{1.0, 50});
    for (double v : w.at(50)) EXPECT_EQ(v, 1.0);
}

TEST(Solver, ThreeStateTaylorSeries) {
    const double c = 1.7, tau = 0.8;
    const auto w = solve_w(three_state(c), TimeGrid{tau, 8});
    // exp(A tau) 1 by brute-force series
    Eigen::Matrix3d a;
    a << 0, c, 0, c, 0, c, 0, c, 0;
    Eigen::Vector3d term = Eigen::Vector3d::Ones(), sum = term;
    for (int n = 1; n < 80; ++n) {
        term = a * term * (tau / n);
        sum += term;
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(w.at(0)[static_cast<std::size_t>(i)] / sum(i), 1.0, 1e-12);
}

TEST(Solver, GeneratorRowZeroByHand) {
    const auto m = duopoly();
    const int rivals[1] = {0};
    const auto g = build_generator(0, rivals, 100.0, m);
    const auto& grid = m.grids[0];
    const double y0 = 500.0, ym = std::sqrt(2.5e7 / 100.1), yp = std::sqrt(2.5e7 / 99.9);
    const double zm = 2.5e7 / (y0 * ym), dm = y0 - ym;
    const double zp = 2.5e7 / (y0 * yp), dp = yp - y0;
    // own and rival quote the same fee-free rates at the centre
    const double down = 50.0 * std::exp(dm * (2.0 * 100.0 + 2.0 * zm - 4.0 * zm) - 1.0);
    const double up = 50.0 * std::exp(dp * (4.0 * zp - 2.0 * 100.0 - 2.0 * zp) - 1.0);
    const std::size_t c = 20;
    EXPECT_NEAR(g.down[c] / down, 1.0, 1e-13);
    EXPECT_NEAR(g.up[c] / up, 1.0, 1e-13);
    EXPECT_NEAR(g.up[c] / g.down[c], up / down, 1e-13);
    EXPECT_NE(g.up[c], g.down[c]);
    EXPECT_EQ(*grid.z_buy(0), grid.secant(-1));
}

TEST(Solver, NoCrossSensitivityIsMonopoly) {
    auto duo = duopoly(50.0, 2.0, 0.0);
    Market mono;
    mono.grids = {duo.grids[0]};
    mono.flow = FlowParams::symmetric(1, 50.0, 2.0, 0.0);
    const auto g1 = build_generator(0, std::span<const int>{}, 100.0, mono);
    for (int l : {-20, -3, 0, 7, 20}) {
        const int rivals[1] = {l};
        const auto g2 = build_generator(0, rivals, 100.0, duo);
        EXPECT_EQ(g1.up, g2.up);
        EXPECT_EQ(g1.down, g2.down);
    }
}

TEST(Solver, OverflowNamesState) {
    const auto m = duopoly(50.0, 4000.0, 4000.0);
    const int rivals[1] = {0};
    try {
        build_generator(0, rivals, 100.0, m);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("own index"), std::string::npos);
    }
}

TEST(Solver, AgreesWithRk4) {
    const auto m = duopoly();
    const auto st = settings();
    for (int l : {-20, 0, 13}) {
        const int rivals[1] = {l};
        const auto g = build_generator(0, rivals, 100.0, m);
        EXPECT_LT(rk4_deviation(g, solve_w(g, st.time), st.time), 1e-8);
    }
}

TEST(Solver, ResidualSecondOrder) {
    const auto m = duopoly();
    const int rivals[1] = {0};
    const auto g = build_generator(0, rivals, 100.0, m);
    const TimeGrid coarse{1.0, 1000}, fine{1.0, 2000};
    const double r1 = hjb_residual(g, solve_w(g, coarse), coarse);
    const double r2 = hjb_residual(g, solve_w(g, fine), fine);
    EXPECT_NEAR(r1 / r2, 4.0, 0.4);
}

// Stated level for 1000 steps. The centred difference carries dt^2/6 w''' and
// the rates here are O(100), so the first step after T sits near 2.5e-3.
TEST(Solver, ResidualLevelAtThousandSteps) {
    const auto m = duopoly();
    const int rivals[1] = {0};
    const auto g = build_generator(0, rivals, 100.0, m);
    const TimeGrid coarse{1.0, 1000};
    EXPECT_LT(hjb_residual(g, solve_w(g, coarse), coarse), 1e-5);
}

TEST(Solver, ResidualDetectsPerturbation) {
    const auto zero = three_state(0.0);
    const TimeGrid t{1.0, 20};
    auto w = solve_w(zero, t);
    EXPECT_EQ(hjb_residual(zero, w, t), 0.0);

    const auto m = duopoly();
    const int rivals[1] = {0};
    const auto g = build_generator(0, rivals, 100.0, m);
    const TimeGrid tg{1.0, 1000};
    auto wp = solve_w(g, tg);
    wp.at(500)[20] += 1e-3;
    EXPECT_GT(hjb_residual(g, wp, tg), 1e-4);
}

TEST(Solver, TerminalFee) {
    const auto m = duopoly();
    const auto sol = solve_two_player(m, settings(100));
    const auto& grid = m.grids[0];
    const int rivals[1] = {0};
    const auto fee = equilibrium_fee(*sol.surfaces[0], grid, Side::buy, 100, 0, rivals);
    ASSERT_TRUE(fee.has_value());
    const double ym = std::sqrt(2.5e7 / 100.1);
    EXPECT_NEAR(*fee, 1.0 / (4.0 * (2.5e7 / (500.0 * ym)) * (500.0 - ym)), 1e-15);
    EXPECT_NEAR(*fee, 0.01000, 5e-6);
    EXPECT_FALSE(equilibrium_fee(*sol.surfaces[0], grid, Side::buy, 100, -20, rivals).has_value());
    EXPECT_FALSE(equilibrium_fee(*sol.surfaces[0], grid, Side::sell, 100, 20, rivals).has_value());
}

TEST(Solver, GeneralMatchesTwoPlayerBitwise) {
    const auto m = duopoly(50.0, 2.0, 2.0, 6);
    const auto st = settings(200);
    const auto a = solve_two_player(m, st);
    const auto b = solve_equilibrium(m, st);
    for (int p = 0; p < 2; ++p) {
        const auto& sa = *a.surfaces[static_cast<std::size_t>(p)];
        const auto& sb = *b.surfaces[static_cast<std::size_t>(p)];
        ASSERT_EQ(sa.tuple_count(), sb.tuple_count());
        for (std::size_t t = 0; t < sa.tuple_count(); ++t) {
            EXPECT_EQ(sa.family(t).w.data(), sb.family(t).w.data());
            EXPECT_EQ(sa.family(t).log_w.data(), sb.family(t).log_w.data());
        }
    }
}

TEST(Solver, SymmetricPlayersShareSurfaces) {
    const auto m = duopoly(50.0, 2.0, 2.0, 6);
    const auto sol = solve_two_player(m, settings(100));
    for (int j = -6; j <= 6; ++j) {
        for (int l = -6; l <= 6; ++l) {
            const int r[1] = {l};
            EXPECT_EQ(sol.surfaces[0]->w(30, j, r), sol.surfaces[1]->w(30, j, r));
        }
    }
}

TEST(Solver, ThreePlayerDedupesIdenticalGenerators) {
    PoolSpec s;
    s.grid_halfwidth = 4;
    Market m;
    m.grids = {build_grid(s), build_grid(s), build_grid(s)};
    m.flow = FlowParams::symmetric(3, 50.0, 2.0, 2.0);
    const auto sol = solve_equilibrium(m, settings(100));
    const auto& s0 = *sol.surfaces[0];
    EXPECT_EQ(s0.tuple_count(), 81u);
    // rival sums are symmetric in the two rivals
    EXPECT_LT(s0.distinct_families(), s0.tuple_count());
    const int a[2] = {1, -2}, b[2] = {-2, 1};
    EXPECT_EQ(s0.w(10, 0, a), s0.w(10, 0, b));
    const int bad[2] = {5, 0};
    EXPECT_THROW(s0.tuple_index(bad), IndexError);
}

TEST(Solver, MoreFlowRaisesExtremeFees) {
    const int rivals[1] = {0};
    std::vector<double> top_buy, top_sell;
    for (double lambda : {50.0, 100.0}) {
        const auto m = duopoly(lambda);
        const auto sol = solve_two_player(m, settings());
        double b = 0.0, s = 0.0;
        for (int j = -20; j <= 20; ++j) {
            if (auto f = equilibrium_fee(*sol.surfaces[0], m.grids[0], Side::buy, 500, j, rivals)) b = std::max(b, *f);
            if (auto f = equilibrium_fee(*sol.surfaces[0], m.grids[0], Side::sell, 500, j, rivals)) s = std::max(s, *f);
        }
        top_buy.push_back(b);
        top_sell.push_back(s);
    }
    EXPECT_GT(top_buy[1], top_buy[0]);
    EXPECT_GT(top_sell[1], top_sell[0]);
}

TEST(Solver, StrictModeDiffersOnlyInLadders) {
    const auto m = duopoly(50.0, 2.0, 2.0, 5);
    const int rivals[1] = {0};
    const auto pde = build_generator(0, rivals, 100.0, m, GeneratorMode::pde);
    const auto strict = build_generator(0, rivals, 100.0, m, GeneratorMode::strict_theorem);
    EXPECT_EQ(pde.dim(), strict.dim());
    EXPECT_NE(pde.up, strict.up);
    EXPECT_EQ(strict.up.back(), 0.0);
    EXPECT_EQ(strict.down.front(), 0.0);
}

TEST(Solver, ValueFunctionAtHorizon) {
    const auto m = duopoly(50.0, 2.0, 2.0, 4);
    const auto sol = solve_two_player(m, settings(50));
    const int rivals[1] = {2};
    EXPECT_EQ(value_function(*sol.surfaces[0], 50, 1, rivals, 12.5), 12.5);
    EXPECT_GT(value_function(*sol.surfaces[0], 0, 1, rivals, 12.5), 12.5);
}
