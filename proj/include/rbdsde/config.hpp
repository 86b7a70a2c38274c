#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rbdsde/assumptions.hpp"
#include "rbdsde/model.hpp"
#include "rbdsde/monotone.hpp"
#include "rbdsde/solver.hpp"

namespace rbdsde {

/// Flat sectioned key = value configuration. Unknown sections or keys are
/// rejected with file:line context; values are validated on parse.
struct RunConfig {
    // [problem]
    std::string problem = "step-generator";
    ProblemOverrides overrides;

    // [grid]
    double horizon = 1.0;
    std::size_t steps = 4;

    // [noise]
    NoiseMode noise_mode = NoiseMode::rademacher_tree;
    std::size_t paths = 10000; // gaussian mode only
    std::uint64_t seed = 42;
    std::size_t d = 1;
    std::size_t l = 1;

    // [solver]
    SolverConfig solver;

    // [scheme]
    SchemeConfig scheme;
    bool scheme_tol_set = false;
    /// Minorant override: "problem" keeps the bank's h; "zero", "neg-y",
    /// "neg-z", "neg-yz" install the named Lipschitz minorants with
    /// constant h_lipschitz.
    std::string h_choice = "problem";
    double h_lipschitz = 0.1;

    // [envelope]
    std::vector<double> envelope_levels{2.0, 8.0, 32.0};
    double envelope_y_min = -8.0;
    double envelope_y_max = 8.0;
    std::size_t envelope_points = 2049;
    double envelope_t = 0.0;

    // [compare]
    double compare_tol = 1e-10;
    std::string compare_case; // empty = whole bank

    // [audit]
    std::size_t audit_budget = 2000;
    AuditBox audit_box;
    bool audit_t_max_set = false;

    // [output]
    std::string out_dir; // empty: $RBDSDE_OUT or "."
    bool dump_field = false;

    // Raw file text, echoed into the manifest.
    std::string raw_text;

    /// Mode-dependent defaults (scheme tol 1e-10 tree / 1e-4 gaussian,
    /// audit box horizon), applied after parsing.
    void resolve();

    /// Builds the configured problem, with the [scheme] minorant override
    /// applied.
    ProblemSpec make_problem() const;
};

RunConfig parse_config_text(const std::string& text,
                            const std::string& filename = "<config>");
RunConfig parse_config_file(const std::string& path);

} // namespace rbdsde
