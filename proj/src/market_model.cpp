#include "ammfee/market_model.hpp"

#include <cmath>
#include <string>

#include "ammfee/errors.hpp"

namespace ammfee {

double FlowParams::k_total(int venue) const {
    double k = k0.at(static_cast<std::size_t>(venue));
    const auto& row = k_cross.at(static_cast<std::size_t>(venue));
    for (int j = 0; j < venues(); ++j) {
        if (j != venue) k += row[static_cast<std::size_t>(j)];
    }
    return k;
}

void FlowParams::validate() const {
    const auto m = k0.size();
    if (m == 0) throw InputError("flow parameters need at least one venue");
    if (lambda_buy.size() != m || lambda_sell.size() != m || k_cross.size() != m) {
        throw InputError("flow parameter vectors must have one entry per venue");
    }
    if (!std::isfinite(zeta) || zeta < 0.0) throw InputError("zeta must be finite and non-negative");
    for (std::size_t i = 0; i < m; ++i) {
        const auto tag = " (venue " + std::to_string(i) + ")";
        if (!(lambda_buy[i] >= 0.0) || !(lambda_sell[i] >= 0.0) || !std::isfinite(lambda_buy[i]) ||
            !std::isfinite(lambda_sell[i])) {
            throw InputError("baseline intensities must be finite and non-negative" + tag);
        }
        if (!(k0[i] > 0.0) || !std::isfinite(k0[i])) throw InputError("k0 must be positive" + tag);
        if (k_cross[i].size() != m) throw InputError("k_cross must be square" + tag);
        for (std::size_t j = 0; j < m; ++j) {
            const double v = k_cross[i][j];
            if (!std::isfinite(v) || v < 0.0) throw InputError("k_cross entries must be non-negative" + tag);
            if (i == j && v != 0.0) throw InputError("k_cross diagonal must be zero" + tag);
        }
        if (!(k_total(static_cast<int>(i)) > 0.0)) throw InputError("total sensitivity must be positive" + tag);
    }
}

FlowParams FlowParams::symmetric(int venues, double lambda, double k0_value, double k_cross_value) {
    FlowParams f;
    const auto m = static_cast<std::size_t>(venues);
    f.lambda_buy.assign(m, lambda);
    f.lambda_sell.assign(m, lambda);
    f.k0.assign(m, k0_value);
    f.k_cross.assign(m, std::vector<double>(m, k_cross_value));
    for (std::size_t i = 0; i < m; ++i) f.k_cross[i][i] = 0.0;
    return f;
}

void to_json(nlohmann::json& j, const FlowParams& flow) {
    j = nlohmann::json{{"lambda_buy", flow.lambda_buy},
                       {"lambda_sell", flow.lambda_sell},
                       {"k0", flow.k0},
                       {"k_cross", flow.k_cross},
                       {"zeta", flow.zeta}};
}

void from_json(const nlohmann::json& j, FlowParams& flow) {
    j.at("lambda_buy").get_to(flow.lambda_buy);
    j.at("lambda_sell").get_to(flow.lambda_sell);
    j.at("k0").get_to(flow.k0);
    j.at("k_cross").get_to(flow.k_cross);
    flow.zeta = j.value("zeta", 0.0);
}

void OracleSpec::validate() const {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw InputError("oracle s0 must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("oracle sigma must be non-negative");
}

void to_json(nlohmann::json& j, const OracleSpec& oracle) {
    j = nlohmann::json{{"s0", oracle.s0},
                       {"sigma", oracle.sigma},
                       {"mode", oracle.mode == OracleMode::constant ? "constant" : "arithmetic_brownian"}};
}

void from_json(const nlohmann::json& j, OracleSpec& oracle) {
    oracle = OracleSpec{};
    oracle.s0 = j.value("s0", 100.0);
    oracle.sigma = j.value("sigma", 0.0);
    const auto mode = j.value("mode", std::string("constant"));
    if (mode == "constant") {
        oracle.mode = OracleMode::constant;
    } else if (mode == "arithmetic_brownian") {
        oracle.mode = OracleMode::arithmetic_brownian;
    } else {
        throw ConfigError("unknown oracle mode '" + mode + "'");
    }
}

double intensity(Side side, int venue, const FeeAdjustedQuote& own, std::span<const double> rival_rates, double s,
                 const FlowParams& params, bool active) {
    if (venue < 0 || venue >= params.venues()) throw IndexError("venue index out of range");
    if (static_cast<int>(rival_rates.size()) != params.venues() - 1) {
        throw InputError("intensity needs one rival rate per rival venue");
    }
    if (!std::isfinite(s)) throw InputError("oracle value must be finite");
    for (double z : rival_rates) {
        if (!std::isfinite(z)) throw InputError("rival rates must be finite");
    }
    if (!active || !(side == Side::buy ? own.buy : own.sell)) return 0.0;

    const auto v = static_cast<std::size_t>(venue);
    const auto& leg = own.leg(side);
    if (!std::isfinite(leg.rate) || !std::isfinite(leg.size)) throw InputError("quote must be finite");

    const double k0 = params.k0[v];
    double anchor = k0 * (side == Side::buy ? s - params.zeta : s + params.zeta);
    std::size_t r = 0;
    for (int j = 0; j < params.venues(); ++j) {
        if (j == venue) continue;
        anchor += params.k_cross[v][static_cast<std::size_t>(j)] * rival_rates[r++];
    }
    const double lambda = side == Side::buy ? params.lambda_buy[v] : params.lambda_sell[v];
    const double value = intensity_from_anchor(side, lambda, params.k_total(venue), anchor, leg.rate, leg.size);
    if (!std::isfinite(value)) throw InputError("intensity overflow");
    return value;
}

std::vector<double> sample_oracle(const OracleSpec& spec, std::span<const double> times, PathRng& rng) {
    spec.validate();
    if (times.empty() || times.front() != 0.0) throw InputError("oracle time grid must start at 0");
    std::vector<double> path(times.size(), spec.s0);
    if (spec.mode == OracleMode::constant) return path;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        if (!(dt > 0.0)) throw InputError("oracle time grid must be increasing");
        path[i] = path[i - 1] + spec.sigma * std::sqrt(dt) * rng.normal();
    }
    return path;
}

}  // namespace ammfee
