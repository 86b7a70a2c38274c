#pragma once

#include <cstddef>

#include "rbdsde/errors.hpp"

namespace rbdsde {

/// Uniform grid on [0, T] with N steps. Nodes are computed as i*dt (never by
/// accumulation); when T/N is exactly representable every node, including
/// t_N = T, is exact.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;
    double dt = 1.0;

    double node(std::size_t i) const { return static_cast<double>(i) * dt; }
    std::size_t nodes() const { return steps + 1; }
};

inline TimeGrid make_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0))
        throw InvalidArgument("make_grid: horizon must be > 0");
    if (steps < 1) throw InvalidArgument("make_grid: steps must be >= 1");
    TimeGrid g;
    g.horizon = horizon;
    g.steps = steps;
    g.dt = horizon / static_cast<double>(steps);
    return g;
}

} // namespace rbdsde
