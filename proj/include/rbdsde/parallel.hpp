#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbdsde::par {

/// Block size for deterministic reductions. Partial sums are formed per
/// fixed block and combined in block order, so the result is bitwise
/// independent of the number of threads.
inline constexpr std::size_t kBlock = 4096;

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

/// Parallel loop over [0, n). The body must write only to slots owned by
/// index i (no cross-index accumulation), which keeps results identical
/// for any thread count.
template <typename Body>
void for_each_index(std::size_t n, Body&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        body(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

/// Serial reference for for_each_index, kept for kernel-equivalence tests.
template <typename Body>
void for_each_index_serial(std::size_t n, Body&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

namespace detail {

template <typename Term>
void block_partials(std::size_t n, Term&& term, std::vector<double>& partials,
                    bool parallel) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    partials.assign(nblocks, 0.0);
    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partials[b] = s;
    };
    if (parallel) {
        for_each_index(nblocks, run_block);
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    }
}

inline double combine(std::span<const double> partials) {
    // Fixed left-to-right combine over block partials.
    double s = 0.0;
    for (double p : partials) s += p;
    return s;
}

} // namespace detail

/// Deterministic blocked sum of term(i) over [0, n). Bitwise reproducible
/// across thread counts because block boundaries and the combine order are
/// fixed.
template <typename Term>
double blocked_sum(std::size_t n, Term&& term) {
    std::vector<double> partials;
    detail::block_partials(n, term, partials, true);
    return detail::combine(partials);
}

/// Serial reference for blocked_sum (same block structure, no threads).
template <typename Term>
double blocked_sum_serial(std::size_t n, Term&& term) {
    std::vector<double> partials;
    detail::block_partials(n, term, partials, false);
    return detail::combine(partials);
}

/// Deterministic blocked accumulation of m-vector terms: out[k] receives
/// sum over i of term(i, k-th slot). term fills a scratch row of width m.
template <typename TermRow>
void blocked_sum_rows(std::size_t n, std::size_t m, TermRow&& term,
                      std::span<double> out, bool parallel = true) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partials(nblocks * m, 0.0);
    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        std::vector<double> row(m);
        double* acc = partials.data() + b * m;
        for (std::size_t i = lo; i < hi; ++i) {
            term(i, std::span<double>(row));
            for (std::size_t k = 0; k < m; ++k) acc[k] += row[k];
        }
    };
    if (parallel) {
        for_each_index(nblocks, run_block);
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    }
    for (std::size_t k = 0; k < m; ++k) out[k] = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b)
        for (std::size_t k = 0; k < m; ++k) out[k] += partials[b * m + k];
}

} // namespace rbdsde::par
