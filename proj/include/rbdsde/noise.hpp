#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rbdsde/time_grid.hpp"

namespace rbdsde {

enum class NoiseMode { gaussian, rademacher_tree };

/// Index i on the grid. The information known at i is exactly
/// {dW_j : j < i} together with {dB_j : j >= i}: the past of the forward
/// noise and the future increments of the backward noise. This is the
/// discrete conditioning rule used by every conditional expectation here.
struct FiltrationIndex {
    std::size_t i = 0;

    bool knows_dW(std::size_t j) const { return j < i; }
    bool knows_dB(std::size_t j) const { return j >= i; }
};

/// Per-path forward increments dW (R^d) and backward increments dB (R^l) on
/// a uniform grid. Immutable after construction and safe to share across
/// threads.
///
/// Gaussian mode draws each increment coordinate from a counter stream keyed
/// by (seed, path, step, axis), so the sample is bitwise reproducible no
/// matter how the sampling loop is partitioned. Rademacher-tree mode holds
/// every +-sqrt(dt) sign pattern exactly once (d = l = 1, P = 2^(2N)); its
/// increments are decoded from the path index bits and need no storage.
class NoiseBundle {
public:
    static NoiseBundle gaussian(const TimeGrid& grid, std::size_t paths,
                                std::size_t d, std::size_t l,
                                std::uint64_t seed);
    static NoiseBundle rademacher_tree(const TimeGrid& grid);

    const TimeGrid& grid() const { return grid_; }
    std::size_t paths() const { return paths_; }
    std::size_t dim_w() const { return d_; }
    std::size_t dim_b() const { return l_; }
    NoiseMode mode() const { return mode_; }
    std::uint64_t seed() const { return seed_; }

    double dW(std::size_t p, std::size_t i, std::size_t axis = 0) const {
        if (mode_ == NoiseMode::rademacher_tree)
            return (p >> i) & 1u ? -sqrt_dt_ : sqrt_dt_;
        return dw_[(p * grid_.steps + i) * d_ + axis];
    }

    double dB(std::size_t p, std::size_t i, std::size_t axis = 0) const {
        if (mode_ == NoiseMode::rademacher_tree)
            return (p >> (grid_.steps + i)) & 1u ? -sqrt_dt_ : sqrt_dt_;
        return db_[(p * grid_.steps + i) * l_ + axis];
    }

    /// W_{t_i} = sum of dW_j over j < i (known at index i).
    double w_at(std::size_t p, std::size_t i, std::size_t axis = 0) const {
        if (mode_ == NoiseMode::rademacher_tree) {
            double s = 0.0;
            for (std::size_t j = 0; j < i; ++j) s += dW(p, j, 0);
            return s;
        }
        return w_prefix_[(p * (grid_.steps + 1) + i) * d_ + axis];
    }

    /// B_T - B_{t_i} = sum of dB_j over j >= i (known at index i).
    double b_tail(std::size_t p, std::size_t i, std::size_t axis = 0) const {
        if (mode_ == NoiseMode::rademacher_tree) {
            double s = 0.0;
            for (std::size_t j = i; j < grid_.steps; ++j) s += dB(p, j, 0);
            return s;
        }
        return b_suffix_[(p * (grid_.steps + 1) + i) * l_ + axis];
    }

    /// Raw gaussian storage, used by reproducibility tests.
    const std::vector<double>& raw_dw() const { return dw_; }
    const std::vector<double>& raw_db() const { return db_; }

private:
    NoiseBundle() = default;

    TimeGrid grid_;
    std::size_t paths_ = 0;
    std::size_t d_ = 1;
    std::size_t l_ = 1;
    NoiseMode mode_ = NoiseMode::gaussian;
    std::uint64_t seed_ = 0;
    double sqrt_dt_ = 0.0;
    std::vector<double> dw_, db_;          // gaussian increments
    std::vector<double> w_prefix_, b_suffix_; // gaussian running sums
};

/// Gaussian bundle: each increment coordinate is i.i.d. N(0, dt).
NoiseBundle sample_noise(const TimeGrid& grid, std::size_t paths,
                         std::size_t d, std::size_t l, std::uint64_t seed);

/// Exact Rademacher tree: all 2^(2N) sign patterns, each exactly once.
/// Guarded at N <= 12.
NoiseBundle enumerate_tree(const TimeGrid& grid);

} // namespace rbdsde
