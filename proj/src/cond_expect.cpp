#include "rbdsde/cond_expect.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "rbdsde/errors.hpp"
#include "rbdsde/parallel.hpp"

namespace rbdsde {

namespace {

class TreeCondExp final : public CondExp {
public:
    explicit TreeCondExp(const NoiseBundle& bundle) : bundle_(bundle) {
        if (bundle.mode() != NoiseMode::rademacher_tree)
            throw InvalidArgument("exact_condexp: bundle is not in tree mode");
    }

    void project(std::size_t i,
                 const std::vector<std::span<const double>>& targets,
                 const std::vector<std::span<double>>& outs) const override {
        const std::size_t n = bundle_.grid().steps;
        if (i > n) throw InvalidArgument("exact_condexp: index out of range");
        const std::size_t groups = std::size_t{1} << n;
        const std::size_t free_count = std::size_t{1} << n;
        const std::size_t w_free_bits = n - i;
        const std::size_t nt = targets.size();

        // Path composed from a group id (known bits) and a free id:
        // group = [W bits < i | B bits >= i], free = [W bits >= i | B < i].
        auto compose = [&](std::size_t g, std::size_t f) -> std::size_t {
            const std::size_t w_known = g & ((std::size_t{1} << i) - 1);
            const std::size_t b_known = g >> i;
            const std::size_t w_free =
                f & ((std::size_t{1} << w_free_bits) - 1);
            const std::size_t b_free = f >> w_free_bits;
            return w_known | (w_free << i) | (b_free << n) |
                   (b_known << (n + i));
        };

        par::for_each_index(groups, [&](std::size_t g) {
            std::vector<double> sums(nt, 0.0);
            for (std::size_t f = 0; f < free_count; ++f) {
                const std::size_t p = compose(g, f);
                for (std::size_t k = 0; k < nt; ++k) sums[k] += targets[k][p];
            }
            // Group sizes are powers of two, so the average is exact.
            for (std::size_t k = 0; k < nt; ++k)
                sums[k] /= static_cast<double>(free_count);
            for (std::size_t f = 0; f < free_count; ++f) {
                const std::size_t p = compose(g, f);
                for (std::size_t k = 0; k < nt; ++k) outs[k][p] = sums[k];
            }
        });
    }

private:
    const NoiseBundle& bundle_;
};

class RegressionCondExp final : public CondExp {
public:
    RegressionCondExp(const NoiseBundle& bundle, const RegressionBasis& basis)
        : bundle_(bundle), basis_(basis) {
        if (basis.indicator &&
            bundle.mode() != NoiseMode::rademacher_tree)
            throw InvalidArgument(
                "regress_condexp: indicator basis requires a tree bundle");
        if (basis.degree < 0)
            throw InvalidArgument("regress_condexp: degree must be >= 0");
        std::vector<int> expo(n_vars(), 0);
        for (int total = 0; total <= basis_.degree; ++total)
            emit(expo, 0, total);
    }

    void project(std::size_t i,
                 const std::vector<std::span<const double>>& targets,
                 const std::vector<std::span<double>>& outs) const override {
        const std::size_t paths = bundle_.paths();
        const std::size_t m = feature_count(i);
        if (paths < 10 * m)
            throw InvalidArgument(
                "regress_condexp: need at least 10 paths per feature (" +
                std::to_string(paths) + " paths, " + std::to_string(m) +
                " features)");
        const std::size_t nt = targets.size();
        const std::size_t tri = m * (m + 1) / 2;

        // Deterministic blocked assembly of the normal equations:
        // row = [upper triangle of psi psi^T | psi * each target].
        std::vector<double> acc(tri + nt * m);
        par::blocked_sum_rows(
            paths, tri + nt * m,
            [&](std::size_t p, std::span<double> row) {
                std::vector<double> psi(m);
                features(i, p, psi);
                std::size_t idx = 0;
                for (std::size_t a = 0; a < m; ++a)
                    for (std::size_t b = a; b < m; ++b)
                        row[idx++] = psi[a] * psi[b];
                for (std::size_t k = 0; k < nt; ++k)
                    for (std::size_t a = 0; a < m; ++a)
                        row[idx++] = psi[a] * targets[k][p];
            },
            acc);

        Eigen::MatrixXd gram(m, m);
        {
            std::size_t idx = 0;
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = a; b < m; ++b) {
                    gram(a, b) = acc[idx];
                    gram(b, a) = acc[idx];
                    ++idx;
                }
        }
        const double trace_scale = gram.trace() / static_cast<double>(m);
        if (basis_.ridge > 0.0)
            gram.diagonal().array() += basis_.ridge * trace_scale;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (basis_.ridge <= 0.0) {
            const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
            const double dmin = ldlt.vectorD().minCoeff();
            if (!(dmin > 1e-12 * dmax))
                throw NumericalError(
                    "regress_condexp: normal equations are rank-deficient; "
                    "set ridge > 0");
        }

        Eigen::MatrixXd beta(m, nt);
        for (std::size_t k = 0; k < nt; ++k) {
            Eigen::VectorXd rhs(m);
            for (std::size_t a = 0; a < m; ++a)
                rhs(static_cast<Eigen::Index>(a)) = acc[tri + k * m + a];
            beta.col(static_cast<Eigen::Index>(k)) = ldlt.solve(rhs);
        }

        par::for_each_index(paths, [&](std::size_t p) {
            std::vector<double> psi(m);
            features(i, p, psi);
            for (std::size_t k = 0; k < nt; ++k) {
                double v = 0.0;
                for (std::size_t a = 0; a < m; ++a)
                    v += psi[a] * beta(static_cast<Eigen::Index>(a),
                                       static_cast<Eigen::Index>(k));
                outs[k][p] = v;
            }
        });
    }

private:
    std::size_t n_vars() const {
        return bundle_.dim_w() + bundle_.dim_b();
    }

    std::size_t extra_b(std::size_t i) const {
        if (!basis_.per_increment_b) return 0;
        return (bundle_.grid().steps - i) * bundle_.dim_b();
    }

    std::size_t feature_count(std::size_t i) const {
        if (basis_.indicator)
            return std::size_t{1} << bundle_.grid().steps;
        return monos_.size() + extra_b(i);
    }

    /// Graded-lex exponent tuples of total degree <= degree over n_vars,
    /// built once at construction.
    void emit(std::vector<int>& expo, std::size_t var, int remaining) {
        if (var + 1 == expo.size()) {
            expo[var] = remaining;
            monos_.push_back(expo);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            expo[var] = e;
            emit(expo, var + 1, remaining - e);
        }
        expo[var] = 0;
    }

    void features(std::size_t i, std::size_t p, std::span<double> psi) const {
        if (basis_.indicator) {
            const std::size_t n = bundle_.grid().steps;
            std::size_t w_known = p & ((std::size_t{1} << i) - 1);
            std::size_t b_known = (p >> (n + i));
            const std::size_t g = w_known | (b_known << i);
            for (double& v : psi) v = 0.0;
            psi[g] = 1.0;
            return;
        }
        const std::size_t d = bundle_.dim_w();
        const std::size_t l = bundle_.dim_b();
        std::vector<double> x(d + l);
        for (std::size_t a = 0; a < d; ++a) x[a] = bundle_.w_at(p, i, a);
        for (std::size_t b = 0; b < l; ++b)
            x[d + b] = bundle_.b_tail(p, i, b);
        for (std::size_t k = 0; k < monos_.size(); ++k) {
            double v = 1.0;
            for (std::size_t a = 0; a < x.size(); ++a)
                for (int e = 0; e < monos_[k][a]; ++e) v *= x[a];
            psi[k] = v;
        }
        if (basis_.per_increment_b) {
            std::size_t idx = monos_.size();
            for (std::size_t j = i; j < bundle_.grid().steps; ++j)
                for (std::size_t b = 0; b < l; ++b)
                    psi[idx++] = bundle_.dB(p, j, b);
        }
    }

    const NoiseBundle& bundle_;
    RegressionBasis basis_;
    std::vector<std::vector<int>> monos_;
};

} // namespace

std::unique_ptr<CondExp> make_tree_condexp(const NoiseBundle& bundle) {
    return std::make_unique<TreeCondExp>(bundle);
}

std::unique_ptr<CondExp> make_regression_condexp(
    const NoiseBundle& bundle, const RegressionBasis& basis) {
    return std::make_unique<RegressionCondExp>(bundle, basis);
}

std::vector<double> exact_condexp(const NoiseBundle& bundle, std::size_t i,
                                  std::span<const double> values) {
    return TreeCondExp(bundle).apply(i, values);
}

std::vector<double> regress_condexp(const NoiseBundle& bundle, std::size_t i,
                                    std::span<const double> values,
                                    const RegressionBasis& basis) {
    return RegressionCondExp(bundle, basis).apply(i, values);
}

} // namespace rbdsde
