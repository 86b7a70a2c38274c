#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rbdsde/noise.hpp"

namespace rbdsde {

/// Regression feature map at index i: monomials up to total degree `degree`
/// in the known-at-i state (W_{t_i}, B_T - B_{t_i}), one variable per
/// coordinate. `ridge` is scaled by trace(Gram)/m before being added to the
/// normal equations. `indicator` switches to one feature per known-at-i tree
/// node (tree bundles only), which saturates the information and must
/// reproduce the exact engine. `per_increment_b` adds each future backward
/// increment dB_j, j >= i, as a linear feature.
struct RegressionBasis {
    int degree = 2;
    double ridge = 1e-10;
    bool indicator = false;
    bool per_increment_b = false;
};

/// Conditional expectation E_i onto the information known at index i.
/// Both engines are deterministic functions of their inputs; the regression
/// engine accumulates its normal equations in fixed blocked order, so
/// results are bitwise identical for any thread count.
class CondExp {
public:
    virtual ~CondExp() = default;

    /// Project several per-path target vectors at index i in one pass
    /// (the engines share group structure / factorization across targets).
    virtual void project(std::size_t i,
                         const std::vector<std::span<const double>>& targets,
                         const std::vector<std::span<double>>& outs) const = 0;

    std::vector<double> apply(std::size_t i,
                              std::span<const double> values) const {
        std::vector<double> out(values.size());
        project(i, {values}, {std::span<double>(out)});
        return out;
    }
};

/// Exact engine: averages over all tree paths agreeing with p on every
/// known-at-i increment. Requires a rademacher-tree bundle.
std::unique_ptr<CondExp> make_tree_condexp(const NoiseBundle& bundle);

/// Least-squares engine: ridge-regularized projection onto the basis.
std::unique_ptr<CondExp> make_regression_condexp(const NoiseBundle& bundle,
                                                 const RegressionBasis& basis);

/// One-shot conveniences.
std::vector<double> exact_condexp(const NoiseBundle& bundle, std::size_t i,
                                  std::span<const double> values);
std::vector<double> regress_condexp(const NoiseBundle& bundle, std::size_t i,
                                    std::span<const double> values,
                                    const RegressionBasis& basis);

} // namespace rbdsde
