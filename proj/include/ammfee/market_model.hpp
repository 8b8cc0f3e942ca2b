#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ammfee/pool_geometry.hpp"
#include "json.hpp"

namespace ammfee {

// Order-flow parameters for M venues. k_cross[i][j] is the sensitivity of
// venue i's flow to venue j's quote; the diagonal is zero.
struct FlowParams {
    std::vector<double> lambda_buy;
    std::vector<double> lambda_sell;
    std::vector<double> k0;
    std::vector<std::vector<double>> k_cross;
    double zeta = 0.0;  // CEX half-spread

    int venues() const { return static_cast<int>(k0.size()); }
    double k_total(int venue) const;

    // Throws InputError on any violated invariant.
    void validate() const;

    // Identical venues: every k_cross off-diagonal entry equals `k_cross_value`.
    static FlowParams symmetric(int venues, double lambda, double k0_value, double k_cross_value);
};

void to_json(nlohmann::json& j, const FlowParams& flow);
void from_json(const nlohmann::json& j, FlowParams& flow);

enum class OracleMode { constant, arithmetic_brownian };

struct OracleSpec {
    double s0 = 100.0;
    double sigma = 0.0;
    OracleMode mode = OracleMode::constant;

    void validate() const;
};

void to_json(nlohmann::json& j, const OracleSpec& oracle);
void from_json(const nlohmann::json& j, OracleSpec& oracle);

// Per-path random stream, seeded with seed XOR path_index so that batches are
// reproducible independently of scheduling.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path_index) : engine_(seed ^ path_index) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Arrival intensity of taker orders at `venue` on `side`.
//
// Buy:  lambda^- exp([k0 ((s - zeta) - r) + sum_j k_ij (z_j - r)] * size)
// Sell: lambda^+ exp([k0 (r - (s + zeta)) + sum_j k_ij (r - z_j)] * size)
//
// where r, size are the venue's fee-adjusted rate and trade size on that side
// and z_j are the rivals' fee-FREE rates on the same side (one per rival, in
// venue order skipping `venue`). Returns 0 when `active` is false or the side has
// no quote (boundary).
double intensity(Side side, int venue, const FeeAdjustedQuote& own, std::span<const double> rival_rates, double s,
                 const FlowParams& params, bool active);

// Same formula on raw numbers; `anchor` is k0 * (s -/+ zeta) + sum_j k_ij z_j.
inline double intensity_from_anchor(Side side, double lambda, double k_total, double anchor, double rate,
                                    double size) {
    const double exponent = side == Side::buy ? (anchor - k_total * rate) * size : (k_total * rate - anchor) * size;
    return lambda * std::exp(exponent);
}

// Oracle path on `times` (increasing, starting at 0).
std::vector<double> sample_oracle(const OracleSpec& spec, std::span<const double> times, PathRng& rng);

}  // namespace ammfee
