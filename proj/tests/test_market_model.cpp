#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ammfee/errors.hpp"
#include "ammfee/market_model.hpp"
#include "ammfee/pool_geometry.hpp"

using namespace ammfee;

TEST(MarketModel, SymmetricDuopolyIntensity) {
    const auto g = build_grid(PoolSpec{});
    const auto flow = FlowParams::symmetric(2, 50.0, 2.0, 2.0);
    const auto q = fee_adjusted_quote(g, 0, 0.0, 0.0);
    const double rival[1] = {*g.z_buy(0)};
    const double got = intensity(Side::buy, 0, q, rival, 100.0, flow, true);
    const double zb = 2.5e7 / (500.0 * std::sqrt(2.5e7 / 100.1));
    const double d = 500.0 - std::sqrt(2.5e7 / 100.1);
    EXPECT_NEAR(got, 50.0 * std::exp(2.0 * (100.0 - zb) * d), 1e-12);
    EXPECT_NEAR(got, 48.77, 5e-3);
}

TEST(MarketModel, SellIntensityMirrors) {
    const auto g = build_grid(PoolSpec{});
    const auto flow = FlowParams::symmetric(2, 50.0, 2.0, 1.0);
    const auto q = fee_adjusted_quote(g, 3, 0.0, 0.004);
    const double rival[1] = {99.9};
    const auto& leg = *q.sell;
    const double expected = 50.0 * std::exp((2.0 * (leg.rate - 100.0) + 1.0 * (leg.rate - 99.9)) * leg.size);
    EXPECT_NEAR(intensity(Side::sell, 0, q, rival, 100.0, flow, true), expected, 1e-12);
}

TEST(MarketModel, InactiveSideHasNoFlow) {
    const auto g = build_grid(PoolSpec{});
    const auto flow = FlowParams::symmetric(2, 50.0, 2.0, 2.0);
    const auto q = fee_adjusted_quote(g, 0, 0.0, 0.0);
    const double rival[1] = {100.0};
    EXPECT_EQ(intensity(Side::buy, 0, q, rival, 100.0, flow, false), 0.0);
    const auto edge = fee_adjusted_quote(g, -20, 0.0, 0.0);
    EXPECT_EQ(intensity(Side::buy, 0, edge, rival, 100.0, flow, true), 0.0);
}

TEST(MarketModel, FlowValidation) {
    auto flow = FlowParams::symmetric(2, 50.0, 2.0, 2.0);
    EXPECT_NO_THROW(flow.validate());
    EXPECT_DOUBLE_EQ(flow.k_total(0), 4.0);
    flow.lambda_buy[1] = -1.0;
    EXPECT_THROW(flow.validate(), InputError);
    flow = FlowParams::symmetric(2, 50.0, 2.0, 2.0);
    flow.k_cross[0][0] = 1.0;
    EXPECT_THROW(flow.validate(), InputError);
}

TEST(MarketModel, ConstantOracle) {
    OracleSpec spec;
    PathRng rng(1, 0);
    const std::vector<double> t{0.0, 0.25, 0.5, 1.0};
    for (double s : sample_oracle(spec, t, rng)) EXPECT_EQ(s, 100.0);
    spec.mode = OracleMode::arithmetic_brownian;
    spec.sigma = 0.0;
    spec.s0 = 97.0;
    for (double s : sample_oracle(spec, t, rng)) EXPECT_EQ(s, 97.0);
}

TEST(MarketModel, BrownianVariance) {
    OracleSpec spec;
    spec.mode = OracleMode::arithmetic_brownian;
    spec.sigma = 1.0;
    const std::vector<double> t{0.0, 0.5, 1.0};
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        PathRng rng(7, static_cast<std::uint64_t>(i));
        const double d = sample_oracle(spec, t, rng).back() - spec.s0;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(MarketModel, PathRngReproducible) {
    PathRng a(42, 3), b(42, 3), c(42, 4);
    for (int i = 0; i < 10; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_NE(PathRng(42, 3).uniform(), c.uniform());
}
