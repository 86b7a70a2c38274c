#pragma once

#include <cstddef>
#include <vector>

#include "rbdsde/errors.hpp"
#include "rbdsde/model.hpp"

namespace rbdsde {

/// Scalar function tabulated on a uniform y-grid, evaluated off-grid by
/// piecewise-linear interpolation (clamped to the end values outside the
/// range).
struct GridFunction1D {
    double y_min = -8.0;
    double y_max = 8.0;
    std::vector<double> values;

    std::size_t points() const { return values.size(); }
    double dy() const {
        return (y_max - y_min) / static_cast<double>(values.size() - 1);
    }
    double node(std::size_t k) const {
        return y_min + static_cast<double>(k) * dy();
    }
    double eval(double y) const;

    template <typename F>
    static GridFunction1D tabulate(double y_min, double y_max, std::size_t G,
                                   F&& f) {
        if (G < 1) throw InvalidArgument("GridFunction1D: G >= 1 required");
        GridFunction1D g;
        g.y_min = y_min;
        g.y_max = y_max;
        g.values.resize(G);
        const double step = G > 1 ? (y_max - y_min) / double(G - 1) : 0.0;
        for (std::size_t k = 0; k < G; ++k)
            g.values[k] = f(y_min + double(k) * step);
        return g;
    }
};

enum class EnvelopeDirection { inf, sup };

/// Largest n-Lipschitz function below f on the grid:
/// e[k] = min_j (f[j] + n |y_k - y_j|), computed by a forward sweep
/// e[k] = min(f[k], e[k-1] + n dy) and a backward sweep
/// e[k] = min(e[k], e[k+1] + n dy).
GridFunction1D inf_envelope(const GridFunction1D& f, double n);

/// Smallest n-Lipschitz function above f; satisfies the exact identity
/// sup_envelope(f, n) = -inf_envelope(-f, n).
GridFunction1D sup_envelope(const GridFunction1D& f, double n);

/// O(G^2) reference used by the tests and benchmark.
GridFunction1D envelope_bruteforce(const GridFunction1D& f, double n,
                                   EnvelopeDirection dir);

/// Wraps a generator in its n-Lipschitz envelope: f(t, ., z) is tabulated on
/// the y-grid, swept (inf for the nondecreasing classes, sup for the
/// decreasing mirror class), and evaluated off-grid by interpolation. The
/// returned spec is declared Lipschitz with constant n. Tabulations are
/// memoized per (t, z) slice behind a lock; values depend only on the key,
/// so results stay deterministic under concurrent sweeps.
GeneratorSpec envelope_generator(const GeneratorSpec& spec, double n,
                                 double y_min = -8.0, double y_max = 8.0,
                                 std::size_t G = 2049);

} // namespace rbdsde
