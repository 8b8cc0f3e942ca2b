#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ammfee/equilibrium_solver.hpp"
#include "ammfee/pool_geometry.hpp"
#include "ammfee/time_grid.hpp"

namespace ammfee {

enum class PolicyKind { equilibrium, linear, constant, zero };

const char* to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

// fee = intercept + own_slope * j + sum_r rival_slopes[r] * l_r, in grid indices.
struct FeePlane {
    double intercept = 0.0;
    double own_slope = 0.0;
    std::vector<double> rival_slopes;

    double at(int own, std::span<const int> rivals) const {
        double v = intercept + own_slope * own;
        for (std::size_t r = 0; r < rival_slopes.size(); ++r) v += rival_slopes[r] * rivals[r];
        return v;
    }
};

// One player's fee rule on the (time x own index x rival indices) lattice.
// Fees are absent on the side that has no quote at the grid edge. Times are
// looked up nearest-left on the policy's own time grid.
class FeePolicy {
public:
    PolicyKind kind() const { return kind_; }
    int player() const { return player_; }
    const TimeGrid& time_grid() const { return time_; }
    int own_halfwidth() const { return own_halfwidth_; }
    const std::vector<int>& rival_halfwidths() const { return rival_halfwidths_; }

    std::optional<double> fee(Side side, int time_index, int own, std::span<const int> rivals) const {
        if (side == Side::buy ? own <= -own_halfwidth_ : own >= own_halfwidth_) return std::nullopt;
        return fee_unchecked(side, time_index, own, rivals);
    }
    std::optional<double> buy_fee(int time_index, int own, std::span<const int> rivals) const {
        return fee(Side::buy, time_index, own, rivals);
    }
    std::optional<double> sell_fee(int time_index, int own, std::span<const int> rivals) const {
        return fee(Side::sell, time_index, own, rivals);
    }

    // Same as fee() for a side that is known to be quoted; no range checks.
    double fee_unchecked(Side side, int time_index, int own, std::span<const int> rivals) const;

    // Linear kind only.
    const FeePlane& plane(Side side, int time_index) const;
    // Constant kind only.
    double constant_value() const { return constant_; }
    // Equilibrium kind only.
    const WSurface& surface() const { return *surface_; }

    friend FeePolicy equilibrium_policy(std::shared_ptr<const WSurface> surface, const InventoryGrid& own_grid);
    friend FeePolicy fit_linear_policy(const FeePolicy& eq, int window);
    friend FeePolicy constant_policy(const FeePolicy& eq);
    friend FeePolicy fixed_fee_policy(int player, TimeGrid time, int own_halfwidth, std::vector<int> rival_halfwidths,
                                      double fee);
    friend FeePolicy linear_policy_from_planes(int player, TimeGrid time, int own_halfwidth,
                                               std::vector<int> rival_halfwidths, std::vector<FeePlane> buy,
                                               std::vector<FeePlane> sell);

private:
    PolicyKind kind_ = PolicyKind::zero;
    int player_ = 0;
    TimeGrid time_;
    int own_halfwidth_ = 0;
    std::vector<int> rival_halfwidths_;

    std::shared_ptr<const WSurface> surface_;
    std::vector<double> buy_denominator_;   // k Z_-(j) Delta_-(j) by array position
    std::vector<double> sell_denominator_;  // k Z_+(j) Delta_+(j)

    std::vector<FeePlane> buy_planes_;
    std::vector<FeePlane> sell_planes_;

    double constant_ = 0.0;
};

// Fees read off the solved surface with the same expression as equilibrium_fee.
FeePolicy equilibrium_policy(std::shared_ptr<const WSurface> surface, const InventoryGrid& own_grid);

// Least-squares plane per time point and side over the (2 window + 1)^M block of
// states centred on the origin. States without a quote on that side are left
// out of the fit.
FeePolicy fit_linear_policy(const FeePolicy& eq, int window);

// (m* + p*) / 2 at t = 0.5 and the all-centre state, applied to both sides.
FeePolicy constant_policy(const FeePolicy& eq);

// Same fee everywhere; fee 0 gives the zero kind.
FeePolicy fixed_fee_policy(int player, TimeGrid time, int own_halfwidth, std::vector<int> rival_halfwidths, double fee);

FeePolicy linear_policy_from_planes(int player, TimeGrid time, int own_halfwidth, std::vector<int> rival_halfwidths,
                                    std::vector<FeePlane> buy, std::vector<FeePlane> sell);

// One equilibrium policy per player.
std::vector<FeePolicy> equilibrium_policies(const EquilibriumSolution& solution, const Market& market);

}  // namespace ammfee
