#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbdsde/errors.hpp"

namespace rbdsde {

/// Drift coefficient f(t, y, z) -> scalar.
using DriftFn = std::function<double(double t, double y,
                                     std::span<const double> z)>;
/// Diffusion coefficient g(t, y, z) -> R^l, written into out.
using DiffusionFn = std::function<void(double t, double y,
                                       std::span<const double> z,
                                       std::span<double> out)>;
/// Terminal condition as a functional of the forward endpoint W_T (R^d).
using TerminalFn = std::function<double(std::span<const double> w_terminal)>;
/// Lower obstacle as a functional of (t, W_t).
using ObstacleFn = std::function<double(double t,
                                        std::span<const double> w_t)>;
/// Difference minorant h(dy, dz) -> scalar.
using MinorantFn = std::function<double(double dy, std::span<const double> dz)>;
/// Deterministic growth envelope phi(t) >= 0.
using GrowthFn = std::function<double(double t)>;

enum class RegularityClass {
    lipschitz,
    continuous,
    left_continuous_nondecreasing,
    right_continuous_decreasing,
};

/// Drift f with the constants that the growth and regularity hypotheses are
/// audited against. lipschitz_C is present iff f is declared Lipschitz.
/// z_free marks drifts that ignore the z argument (lets the envelope cache
/// tabulations per time slice only).
struct GeneratorSpec {
    DriftFn f;
    GrowthFn growth_phi;
    double kappa = 0.1;
    std::optional<double> lipschitz_C;
    RegularityClass regularity = RegularityClass::continuous;
    bool z_free = false;
};

/// Diffusion g with its increment-bound constants: squared increments are
/// bounded by g_C |dy|^2 + alpha |dz|^2 with 0 < alpha < 1.
struct DiffusionSpec {
    DiffusionFn g;
    double g_C = 0.1;
    double alpha = 0.5;
    bool is_zero = false;
};

/// Minorant h for the difference bound f(y1,z1) - f(y2,z2) >= h(y1-y2, z1-z2)
/// when y1 >= y2. Required Lipschitz here (constant h_lipschitz) so the
/// iteration's inner generators stay Lipschitz.
struct MinorantSpec {
    MinorantFn h;
    double h_lipschitz = 0.1;
};

/// The problem quadruple (f, g, xi, S) plus the minorant, dimensions d
/// (forward noise / z) and l (backward noise). Evaluators must be pure; they
/// are called concurrently from path-parallel loops.
struct ProblemSpec {
    std::string name;
    GeneratorSpec generator;
    DiffusionSpec diffusion;
    std::optional<MinorantSpec> minorant;
    TerminalFn terminal;
    std::optional<ObstacleFn> obstacle;
    std::size_t d = 1;
    std::size_t l = 1;
};

/// Optional constant overrides applied on top of a bank entry. Only the
/// fields meaningful for the chosen problem are honored; see builtin_problem.
struct ProblemOverrides {
    std::optional<double> kappa;
    std::optional<double> phi;            // constant growth level
    std::optional<double> drift_level;    // linear-drift constant c
    std::optional<double> terminal_const; // constant terminal value
    std::optional<double> obstacle_level; // constant obstacle level
};

/// Built-in example bank: `step-generator`, `snell-only`,
/// `additive-backward`, `linear-drift`, `lipschitz-markov`.
ProblemSpec builtin_problem(std::string_view name,
                            const ProblemOverrides& overrides = {});

/// Names in the bank, in documentation order.
std::vector<std::string> builtin_problem_names();

} // namespace rbdsde
