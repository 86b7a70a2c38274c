#include "rbdsde/noise.hpp"

#include <cmath>

#include "rbdsde/errors.hpp"
#include "rbdsde/parallel.hpp"
#include "rbdsde/philox.hpp"

namespace rbdsde {

NoiseBundle NoiseBundle::gaussian(const TimeGrid& grid, std::size_t paths,
                                  std::size_t d, std::size_t l,
                                  std::uint64_t seed) {
    if (paths < 1 || d < 1 || l < 1)
        throw InvalidArgument("sample_noise: paths, d, l must be >= 1");
    NoiseBundle nb;
    nb.grid_ = grid;
    nb.paths_ = paths;
    nb.d_ = d;
    nb.l_ = l;
    nb.mode_ = NoiseMode::gaussian;
    nb.seed_ = seed;
    nb.sqrt_dt_ = std::sqrt(grid.dt);

    const std::size_t n = grid.steps;
    nb.dw_.resize(paths * n * d);
    nb.db_.resize(paths * n * l);
    nb.w_prefix_.resize(paths * (n + 1) * d);
    nb.b_suffix_.resize(paths * (n + 1) * l);

    const double sdt = nb.sqrt_dt_;
    // Forward axes use ids [0, d); backward axes [d, d + l).
    par::for_each_index(paths, [&](std::size_t p) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < d; ++a)
                nb.dw_[(p * n + i) * d + a] =
                    sdt * normal_draw(seed, p, static_cast<std::uint32_t>(i),
                                      static_cast<std::uint32_t>(a));
            for (std::size_t a = 0; a < l; ++a)
                nb.db_[(p * n + i) * l + a] =
                    sdt * normal_draw(seed, p, static_cast<std::uint32_t>(i),
                                      static_cast<std::uint32_t>(d + a));
        }
        for (std::size_t a = 0; a < d; ++a) {
            double s = 0.0;
            nb.w_prefix_[(p * (n + 1) + 0) * d + a] = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += nb.dw_[(p * n + i) * d + a];
                nb.w_prefix_[(p * (n + 1) + i + 1) * d + a] = s;
            }
        }
        for (std::size_t a = 0; a < l; ++a) {
            double s = 0.0;
            nb.b_suffix_[(p * (n + 1) + n) * l + a] = 0.0;
            for (std::size_t i = n; i-- > 0;) {
                s += nb.db_[(p * n + i) * l + a];
                nb.b_suffix_[(p * (n + 1) + i) * l + a] = s;
            }
        }
    });
    return nb;
}

NoiseBundle NoiseBundle::rademacher_tree(const TimeGrid& grid) {
    if (grid.steps > 12)
        throw CapacityError(
            "enumerate_tree: N > 12 would enumerate more than 2^24 paths");
    NoiseBundle nb;
    nb.grid_ = grid;
    nb.paths_ = std::size_t{1} << (2 * grid.steps);
    nb.d_ = 1;
    nb.l_ = 1;
    nb.mode_ = NoiseMode::rademacher_tree;
    nb.sqrt_dt_ = std::sqrt(grid.dt);
    return nb;
}

NoiseBundle sample_noise(const TimeGrid& grid, std::size_t paths,
                         std::size_t d, std::size_t l, std::uint64_t seed) {
    return NoiseBundle::gaussian(grid, paths, d, l, seed);
}

NoiseBundle enumerate_tree(const TimeGrid& grid) {
    return NoiseBundle::rademacher_tree(grid);
}

} // namespace rbdsde
