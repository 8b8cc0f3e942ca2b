#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace ammfee {

// Uniform grid t_k = k * horizon / steps, k = 0..steps.
struct TimeGrid {
    double horizon = 1.0;
    int steps = 1000;

    double dt() const { return horizon / steps; }
    double time(int k) const { return horizon * static_cast<double>(k) / static_cast<double>(steps); }

    // Nearest grid point at or before t (policies are predictable), clamped to the grid.
    int index_at(double t) const {
        const double raw = t / horizon * static_cast<double>(steps);
        const int k = static_cast<int>(std::floor(raw + 1e-9));
        return std::clamp(k, 0, steps);
    }

    std::vector<double> times() const {
        std::vector<double> out(static_cast<std::size_t>(steps) + 1);
        for (int k = 0; k <= steps; ++k) out[static_cast<std::size_t>(k)] = time(k);
        return out;
    }

    bool operator==(const TimeGrid&) const = default;
};

}  // namespace ammfee
