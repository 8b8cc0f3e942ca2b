#include "ammfee/fee_policy.hpp"

#include <algorithm>
#include <string>

#include "ammfee/errors.hpp"

namespace ammfee {

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::equilibrium: return "equilibrium";
        case PolicyKind::linear: return "linear";
        case PolicyKind::constant: return "constant";
        case PolicyKind::zero: return "zero";
    }
    return "?";
}

PolicyKind policy_kind_from_string(const std::string& name) {
    if (name == "equilibrium" || name == "optimal") return PolicyKind::equilibrium;
    if (name == "linear") return PolicyKind::linear;
    if (name == "constant") return PolicyKind::constant;
    if (name == "zero") return PolicyKind::zero;
    throw ConfigError("unknown policy kind '" + name + "'");
}

double FeePolicy::fee_unchecked(Side side, int time_index, int own, std::span<const int> rivals) const {
    switch (kind_) {
        case PolicyKind::equilibrium: {
            const auto& fam = surface_->family(surface_->tuple_index_unchecked(rivals));
            const auto lw = fam.log_w.at(time_index);
            const auto i = static_cast<std::size_t>(own + own_halfwidth_);
            if (side == Side::buy) return (1.0 + (lw[i] - lw[i - 1])) / buy_denominator_[i];
            return (1.0 + (lw[i] - lw[i + 1])) / sell_denominator_[i];
        }
        case PolicyKind::linear:
            return (side == Side::buy ? buy_planes_ : sell_planes_)[static_cast<std::size_t>(time_index)].at(own,
                                                                                                             rivals);
        case PolicyKind::constant:
        case PolicyKind::zero:
            return constant_;
    }
    return 0.0;
}

const FeePlane& FeePolicy::plane(Side side, int time_index) const {
    if (kind_ != PolicyKind::linear) throw InputError("plane() needs a linear policy");
    return (side == Side::buy ? buy_planes_ : sell_planes_).at(static_cast<std::size_t>(time_index));
}

FeePolicy equilibrium_policy(std::shared_ptr<const WSurface> surface, const InventoryGrid& own_grid) {
    if (!surface) throw InputError("missing surface");
    if (own_grid.halfwidth() != surface->own_halfwidth()) throw InputError("grid does not match the surface");
    FeePolicy p;
    p.kind_ = PolicyKind::equilibrium;
    p.player_ = surface->player();
    p.time_ = surface->time_grid();
    p.own_halfwidth_ = surface->own_halfwidth();
    p.rival_halfwidths_ = surface->rival_halfwidths();
    const int n = own_grid.halfwidth();
    const double k = surface->k_total();
    p.buy_denominator_.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    p.sell_denominator_.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    for (int j = -n; j <= n; ++j) {
        const auto i = static_cast<std::size_t>(j + n);
        if (j > -n) p.buy_denominator_[i] = k * own_grid.secant(j - 1) * own_grid.step(j - 1);
        if (j < n) p.sell_denominator_[i] = k * own_grid.secant(j) * own_grid.step(j);
    }
    p.surface_ = std::move(surface);
    return p;
}

namespace {

FeePlane fit_plane(const FeePolicy& eq, Side side, int time_index, int window) {
    const std::size_t rivals = eq.rival_halfwidths().size();
    const std::size_t dims = rivals + 1;
    const std::size_t width = static_cast<std::size_t>(2 * window + 1);
    std::size_t count = 1;
    for (std::size_t d = 0; d < dims; ++d) count *= width;

    std::vector<std::vector<int>> points;
    std::vector<double> values;
    std::vector<int> state(rivals);
    for (std::size_t c = 0; c < count; ++c) {
        std::size_t rem = c;
        int own = 0;
        for (std::size_t d = dims; d-- > 0;) {
            const int v = static_cast<int>(rem % width) - window;
            rem /= width;
            if (d == 0) own = v;
            else state[d - 1] = v;
        }
        const auto f = eq.fee(side, time_index, own, state);
        if (!f) continue;
        std::vector<int> pt{own};
        pt.insert(pt.end(), state.begin(), state.end());
        points.push_back(std::move(pt));
        values.push_back(*f);
    }
    if (values.empty()) throw InputError("linear fit window has no quoted states");

    FeePlane plane;
    plane.rival_slopes.assign(rivals, 0.0);
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        plane.intercept = values.front();
        return plane;
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(dims + 1));
    Eigen::VectorXd b(static_cast<Eigen::Index>(values.size()));
    for (std::size_t r = 0; r < values.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        a(row, 0) = 1.0;
        for (std::size_t d = 0; d < dims; ++d) a(row, static_cast<Eigen::Index>(d + 1)) = points[r][d];
        b(row) = values[r];
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    plane.intercept = x(0);
    plane.own_slope = x(1);
    for (std::size_t r = 0; r < rivals; ++r) plane.rival_slopes[r] = x(static_cast<Eigen::Index>(r + 2));
    return plane;
}

}  // namespace

FeePolicy fit_linear_policy(const FeePolicy& eq, int window) {
    if (eq.kind() != PolicyKind::equilibrium) throw InputError("linear fit needs an equilibrium policy");
    if (window < 1) throw InputError("linear fit window must be at least 1");
    if (window > eq.own_halfwidth()) throw InputError("linear fit window exceeds the own grid");
    for (int n : eq.rival_halfwidths()) {
        if (window > n) throw InputError("linear fit window exceeds a rival grid");
    }
    FeePolicy p;
    p.kind_ = PolicyKind::linear;
    p.player_ = eq.player();
    p.time_ = eq.time_grid();
    p.own_halfwidth_ = eq.own_halfwidth();
    p.rival_halfwidths_ = eq.rival_halfwidths();
    const auto slices = static_cast<std::size_t>(eq.time_grid().steps) + 1;
    p.buy_planes_.resize(slices);
    p.sell_planes_.resize(slices);
    for (std::size_t k = 0; k < slices; ++k) {
        p.buy_planes_[k] = fit_plane(eq, Side::buy, static_cast<int>(k), window);
        p.sell_planes_[k] = fit_plane(eq, Side::sell, static_cast<int>(k), window);
    }
    return p;
}

FeePolicy constant_policy(const FeePolicy& eq) {
    if (eq.kind() != PolicyKind::equilibrium) throw InputError("constant policy needs an equilibrium policy");
    if (eq.own_halfwidth() < 1) throw InputError("constant policy needs both quotes at the centre state");
    const int k = eq.time_grid().index_at(0.5);
    const std::vector<int> centre(eq.rival_halfwidths().size(), 0);
    const double c = 0.5 * (*eq.sell_fee(k, 0, centre) + *eq.buy_fee(k, 0, centre));
    auto p = fixed_fee_policy(eq.player(), eq.time_grid(), eq.own_halfwidth(), eq.rival_halfwidths(), c);
    p.kind_ = PolicyKind::constant;
    return p;
}

FeePolicy fixed_fee_policy(int player, TimeGrid time, int own_halfwidth, std::vector<int> rival_halfwidths,
                           double fee) {
    FeePolicy p;
    p.kind_ = fee == 0.0 ? PolicyKind::zero : PolicyKind::constant;
    p.player_ = player;
    p.time_ = time;
    p.own_halfwidth_ = own_halfwidth;
    p.rival_halfwidths_ = std::move(rival_halfwidths);
    p.constant_ = fee;
    return p;
}

FeePolicy linear_policy_from_planes(int player, TimeGrid time, int own_halfwidth, std::vector<int> rival_halfwidths,
                                    std::vector<FeePlane> buy, std::vector<FeePlane> sell) {
    const auto slices = static_cast<std::size_t>(time.steps) + 1;
    if (buy.size() != slices || sell.size() != slices) throw InputError("one plane per time point is required");
    for (const auto* planes : {&buy, &sell}) {
        for (const auto& pl : *planes) {
            if (pl.rival_slopes.size() != rival_halfwidths.size()) throw InputError("plane has the wrong rival count");
        }
    }
    FeePolicy p;
    p.kind_ = PolicyKind::linear;
    p.player_ = player;
    p.time_ = time;
    p.own_halfwidth_ = own_halfwidth;
    p.rival_halfwidths_ = std::move(rival_halfwidths);
    p.buy_planes_ = std::move(buy);
    p.sell_planes_ = std::move(sell);
    return p;
}

std::vector<FeePolicy> equilibrium_policies(const EquilibriumSolution& solution, const Market& market) {
    std::vector<FeePolicy> out;
    for (const auto& s : solution.surfaces) {
        out.push_back(equilibrium_policy(s, market.grids.at(static_cast<std::size_t>(s->player()))));
    }
    return out;
}

}  // namespace ammfee
