#pragma once

// Shared helpers for the test suites, including the solution-triple
// post-hook run on every field a test produces.

#include <cmath>

#include "doctest.h"
#include "rbdsde/solver.hpp"

namespace testsup {

/// Definition post-hook: Y >= S exact, K_0 = 0, dK >= 0, and the discrete
/// Skorokhod sum exactly zero. Call on every produced SolutionField.
inline void check_solution_triple(const rbdsde::ProblemSpec& spec,
                                  const rbdsde::NoiseBundle& noise,
                                  const rbdsde::SolutionField& field,
                                  const rbdsde::SolverConfig& cfg) {
    const rbdsde::ResidualReport rep =
        rbdsde::residual_check(spec, noise, field, cfg);
    CHECK(rep.all_finite);
    CHECK(rep.min_dk >= 0.0);
    CHECK(rep.max_obstacle_violation == 0.0);
    CHECK(rep.max_skorokhod == 0.0);
    for (std::size_t p = 0; p < field.paths; ++p) CHECK(field.K(p, 0) == 0.0);
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

} // namespace testsup
