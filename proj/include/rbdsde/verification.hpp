#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rbdsde/model.hpp"
#include "rbdsde/monotone.hpp"
#include "rbdsde/noise.hpp"
#include "rbdsde/solver.hpp"

namespace rbdsde {

/// Two problems sharing g and dimensions, run under coupled noise. The
/// hypothesis tags record which ordering assumptions the case claims;
/// compare() audits them and refuses to run when one fails.
struct ComparisonCase {
    std::string id;
    ProblemSpec spec1;
    ProblemSpec spec2;
    /// Solve spec1 by the monotone scheme (minimal selection) instead of a
    /// direct Lipschitz solve.
    bool spec1_minimal = false;
    /// Which side carries the Lipschitz/continuous regularity: with side 1
    /// the generator ordering is audited along (Y2, Z2), with side 2 along
    /// (Y1, Z1).
    int regular_side = 1;
    /// Forced update rule (large-n envelope drifts break the implicit
    /// contraction bound at coarse dt, so those cases run explicit).
    std::optional<YUpdate> y_update_override;
    SchemeConfig scheme;
};

/// Pathwise and mean-level violation statistics of Y1 <= Y2.
struct ViolationReport {
    double max_positive_part = 0.0; // max over (p,i) of (Y1 - Y2)+
    std::size_t count_pathwise = 0; // grid points with Y1 - Y2 > tol
    /// Time indices whose cross-path mean difference exceeds three Monte
    /// Carlo standard errors (the statistically meaningful count for
    /// regression-engine runs).
    std::size_t count_mean_3se = 0;
    std::size_t witness_path = 0;
    std::size_t witness_node = 0;
};

/// Solves both problems on the identical bundle and tallies violations of
/// the comparison conclusion. Throws HypothesisError when an audited
/// hypothesis (terminal order, obstacle order, generator order along the
/// solved trajectory) fails.
ViolationReport compare(const ComparisonCase& cmp, const NoiseBundle& noise,
                        const SolverConfig& cfg, double tol);

/// The shipped case bank: constant-drift, terminal-order, obstacle-order
/// and both-regular cases, the minimal-vs-majorant case, and the envelope
/// ladder n in {2, 8, 32} against the constant majorant.
std::vector<ComparisonCase> comparison_bank();

/// Positivity scenario: solves the equation with drift h(y, z) + phi(t),
/// terminal xi >= 0 and g = 0, once with the finite-variation process A = 0
/// and once with A = the reflection process of an obstacle at zero (which
/// grows only where Y = 0). Reports the minimum of Y over paths and nodes
/// for both runs. Negative phi or xi is a precondition error.
struct PositivityReport {
    double min_y_free = 0.0;
    double min_y_reflected = 0.0;
};

PositivityReport lemma_positivity(const GrowthFn& phi, const TerminalFn& xi,
                                  const MinorantSpec& h,
                                  const NoiseBundle& noise,
                                  const SolverConfig& cfg);

/// Named positivity scenarios used by the CLI and the acceptance suite.
struct PositivityScenario {
    std::string id;
    GrowthFn phi;
    TerminalFn xi;
    MinorantSpec h;
};
std::vector<PositivityScenario> positivity_scenarios();

/// Snell dynamic programming oracle for the f = 0, g = 0 reflected case:
/// Y_i = max(S_i, E_i[Y_{i+1}]), dK_i = (Y_i - E_i[Y_{i+1}])+, and
/// Z_i = (1/dt) E_i[Y_{i+1} dW_i]. Conditional expectations by exhaustive
/// enumeration, independent of the production engines. Pass a null obstacle
/// to disable reflection (then Y_i = E_i[xi], K = 0).
SolutionField snell_oracle(const ObstacleFn* obstacle, const TerminalFn& xi,
                           const NoiseBundle& tree);

/// Gold-standard oracle: the same backward recursion as solve_lipschitz but
/// with conditional expectations by exhaustive enumeration and the scalar
/// fixed point solved to 1e-14 by bisection. No code shared with the
/// production engines. Guarded at N <= 6, d = l = 1.
SolutionField tree_bruteforce(const ProblemSpec& spec, const NoiseBundle& tree,
                              const SolverConfig& cfg);

/// Max |Y|, |Z|, |dK| discrepancies between two fields on the same layout.
struct FieldDelta {
    double max_dy = 0.0;
    double max_dz = 0.0;
    double max_dk = 0.0;
    double max_all() const;
};
FieldDelta field_delta(const SolutionField& a, const SolutionField& b);

} // namespace rbdsde
