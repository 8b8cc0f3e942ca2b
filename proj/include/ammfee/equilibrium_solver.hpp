#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ammfee/market_model.hpp"
#include "ammfee/pool_geometry.hpp"
#include "ammfee/time_grid.hpp"

namespace ammfee {

// M pools and the order flow between them.
struct Market {
    std::vector<InventoryGrid> grids;
    FlowParams flow;

    int players() const { return static_cast<int>(grids.size()); }
    void validate() const;
};

// How the tridiagonal generator evaluates the exchange-rate ladders.
//
// pde:            row j uses Z and Delta at its own state j (the reduced HJB).
// strict_theorem: entry (i, i+1) uses the ladder at the column state i+1 and
//                 entry (i, i-1) at the column state i-1, i.e. the matrix
//                 entries transcribed literally; edge rows need ghost states.
enum class GeneratorMode { pde, strict_theorem };

const char* to_string(GeneratorMode mode);

// Tridiagonal, zero-diagonal transition-rate matrix over one player's
// inventory grid, conditioned on the rivals' states and the oracle value.
// up[i] is the (i, i+1) entry, down[i] the (i, i-1) entry, both stored by
// array position i = j + N. up[2N] and down[0] are absent and stored as 0.
struct GeneratorMatrix {
    int halfwidth = 0;
    std::vector<double> up;
    std::vector<double> down;
    int player = 0;
    std::vector<int> rival_state;
    double oracle = 0.0;

    int dim() const { return 2 * halfwidth + 1; }
    Eigen::MatrixXd dense() const;
};

GeneratorMatrix build_generator(int player, std::span<const int> rival_state, double oracle, const Market& market,
                                GeneratorMode mode = GeneratorMode::pde);

// w(t_k) for k = 0..steps of one generator; w(t_steps) is all ones.
class WPath {
public:
    WPath() = default;
    WPath(int dim, int steps) : dim_(dim), steps_(steps), data_(static_cast<std::size_t>(dim) * (steps + 1)) {}

    int dim() const { return dim_; }
    int steps() const { return steps_; }
    std::span<const double> at(int k) const {
        return {data_.data() + static_cast<std::size_t>(k) * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<double> at(int k) {
        return {data_.data() + static_cast<std::size_t>(k) * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& data() const { return data_; }

private:
    int dim_ = 0;
    int steps_ = 0;
    std::vector<double> data_;
};

// w(t_k) = exp(A (T - t_k)) 1 by one matrix exponential E = exp(A dt) and the
// backward recursion w(t_k) = E w(t_{k+1}).
WPath solve_w(const GeneratorMatrix& generator, const TimeGrid& time);

// Solved w for one player over (time x own index x rival-state tuple). Rival
// tuples list the other players' indices in venue order. Identical
// generators share one stored w family.
class WSurface {
public:
    struct Family {
        GeneratorMatrix generator;
        WPath w;
        WPath log_w;
    };

    WSurface(int player, TimeGrid time, double k_total, int own_halfwidth, std::vector<int> rival_halfwidths,
             std::shared_ptr<const std::vector<Family>> families, std::vector<std::int32_t> family_of_tuple);

    int player() const { return player_; }
    const TimeGrid& time_grid() const { return time_; }
    double k_total() const { return k_total_; }
    int own_halfwidth() const { return own_halfwidth_; }
    const std::vector<int>& rival_halfwidths() const { return rival_halfwidths_; }
    std::size_t tuple_count() const { return family_of_tuple_.size(); }

    // Row-major flat index of a rival-state tuple; throws IndexError if out of range.
    std::size_t tuple_index(std::span<const int> rival_state) const;
    // Same without range checks.
    std::size_t tuple_index_unchecked(std::span<const int> rival_state) const {
        std::size_t idx = 0;
        for (std::size_t r = 0; r < rival_halfwidths_.size(); ++r) {
            idx = idx * static_cast<std::size_t>(2 * rival_halfwidths_[r] + 1) +
                  static_cast<std::size_t>(rival_state[r] + rival_halfwidths_[r]);
        }
        return idx;
    }
    std::vector<int> tuple_state(std::size_t tuple) const;

    const Family& family(std::size_t tuple) const {
        return (*families_)[static_cast<std::size_t>(family_of_tuple_[tuple])];
    }
    std::size_t distinct_families() const { return families_->size(); }

    double w(int time_index, int own, std::span<const int> rival_state) const;
    double log_w(int time_index, int own, std::span<const int> rival_state) const;

private:
    int player_;
    TimeGrid time_;
    double k_total_;
    int own_halfwidth_;
    std::vector<int> rival_halfwidths_;
    std::shared_ptr<const std::vector<Family>> families_;
    std::vector<std::int32_t> family_of_tuple_;
};

struct SolverSettings {
    TimeGrid time{1.0, 1000};
    double oracle = 100.0;
    GeneratorMode mode = GeneratorMode::pde;
    int threads = 0;
};

struct EquilibriumSolution {
    SolverSettings settings;
    std::vector<std::shared_ptr<const WSurface>> surfaces;  // one per player
};

// M-player solve: one generator per (player, rival-state tuple), deduplicated
// on identical coefficients, each solved with solve_w.
EquilibriumSolution solve_equilibrium(const Market& market, const SolverSettings& settings);

// Two-player solve indexed directly by the single opponent's state.
EquilibriumSolution solve_two_player(const Market& market, const SolverSettings& settings);

// Equilibrium fee at one state; absent at the grid edge for that side.
//   buy:  (1 + log(w(j) / w(j-1))) / (k Z_-(j) Delta_-(j))
//   sell: (1 + log(w(j) / w(j+1))) / (k Z_+(j) Delta_+(j))
std::optional<double> equilibrium_fee(const WSurface& surface, const InventoryGrid& own_grid, Side side,
                                      int time_index, int own, std::span<const int> rival_state);

// Max over interior times, states and tuples of the centered-difference
// residual of dw/dt + down(j) w(j-1) + up(j) w(j+1) = 0, each scaled by
// max(1, |dw/dt|).
double hjb_residual(const GeneratorMatrix& generator, const WPath& w, const TimeGrid& time);
double hjb_residual(const WSurface& surface);

// v = cash + log(w) / k.
inline double value_function(double w, double cash, double k_total) { return cash + std::log(w) / k_total; }
double value_function(const WSurface& surface, int time_index, int own, std::span<const int> rival_state, double cash);

}  // namespace ammfee
