#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rbdsde/cond_expect.hpp"
#include "rbdsde/solver.hpp"
#include "support.hpp"

using namespace rbdsde;

TEST_CASE("linear drift integrates deterministically") {
    const ProblemSpec spec = builtin_problem("linear-drift"); // f=1, xi=2
    for (std::size_t N : {std::size_t{1}, std::size_t{4}}) {
        const NoiseBundle noise = enumerate_tree(make_grid(1.0, N));
        for (YUpdate upd : {YUpdate::implicit_y, YUpdate::explicit_y}) {
            SolverConfig cfg;
            cfg.y_update = upd;
            const SolutionField f = solve_lipschitz(spec, noise, cfg);
            for (std::size_t p = 0; p < f.paths; ++p) {
                CHECK(f.Y(p, 0) == doctest::Approx(3.0).epsilon(1e-13));
                for (std::size_t i = 0; i <= N; ++i) {
                    CHECK(std::abs(f.Z(p, i)) <= 1e-12);
                    CHECK(f.dK(p, i) == 0.0);
                }
            }
            testsup::check_solution_triple(spec, noise, f, cfg);
        }
    }
}

TEST_CASE("additive backward noise telescopes exactly") {
    const ProblemSpec spec = builtin_problem("additive-backward");
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 5));
    SolverConfig cfg;
    const SolutionField f = solve_lipschitz(spec, noise, cfg);
    for (std::size_t p = 0; p < f.paths; ++p)
        for (std::size_t i = 0; i <= 5; ++i) {
            CHECK(std::abs(f.Y(p, i) - noise.b_tail(p, i)) <= 1e-13);
            CHECK(std::abs(f.Z(p, i)) <= 1e-12);
        }
    testsup::check_solution_triple(spec, noise, f, cfg);
}

TEST_CASE("snell-only hand values at N = 2") {
    const ProblemSpec spec = builtin_problem("snell-only");
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 2));
    SolverConfig cfg;
    const SolutionField f = solve_lipschitz(spec, noise, cfg);
    for (std::size_t p = 0; p < f.paths; ++p) {
        CHECK(f.Y(p, 0) == 1.0);
        CHECK(f.Y(p, 1) == 0.5);
        CHECK(f.dK(p, 0) == 0.5);
        CHECK(f.dK(p, 1) == 0.5);
        CHECK(f.K_terminal(p) == 1.0);
    }
    testsup::check_solution_triple(spec, noise, f, cfg);
}

TEST_CASE("solver output satisfies the discrete equation") {
    const ProblemSpec spec = builtin_problem("lipschitz-markov");
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 4));
    SolverConfig cfg;
    const SolutionField f = solve_lipschitz(spec, noise, cfg);
    const ResidualReport rep = residual_check(spec, noise, f, cfg);
    CHECK(rep.max_projected_residual <= 1e-12);
    CHECK(rep.definition_ok());
}

TEST_CASE("hand-built fields certify both discrete solutions of the step") {
    const ProblemSpec spec = builtin_problem("step-generator");
    const std::size_t N = 4;
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, N));
    SolverConfig cfg;

    SolutionField zero = SolutionField::zeros(noise.paths(), N, 1);
    zero.reflected = true;
    const ResidualReport rz = residual_check(spec, noise, zero, cfg);
    CHECK(rz.max_projected_residual <= 1e-12);
    CHECK(rz.definition_ok());

    // Y_t = T - t also solves the discrete equation once the obstacle is
    // dropped: the two certified fields exhibit non-uniqueness.
    ProblemSpec free_spec = spec;
    free_spec.obstacle.reset();
    SolutionField ramp = SolutionField::zeros(noise.paths(), N, 1);
    for (std::size_t p = 0; p < ramp.paths; ++p)
        for (std::size_t i = 0; i <= N; ++i)
            ramp.Y(p, i) = noise.grid().horizon - noise.grid().node(i);
    const ResidualReport rr = residual_check(free_spec, noise, ramp, cfg);
    CHECK(rr.max_projected_residual <= 1e-12);
}

TEST_CASE("implicit contraction guard") {
    const ProblemSpec spec = builtin_problem("lipschitz-markov"); // C = 1
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 1));  // dt = 1
    SolverConfig cfg;
    CHECK_THROWS_AS(solve_lipschitz(spec, noise, cfg), NumericalError);
    cfg.y_update = YUpdate::explicit_y; // no contraction requirement
    CHECK_NOTHROW(solve_lipschitz(spec, noise, cfg));
}

TEST_CASE("non-Lipschitz generator is rejected") {
    const ProblemSpec spec = builtin_problem("step-generator");
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 2));
    CHECK_THROWS_AS(solve_lipschitz(spec, noise, SolverConfig{}),
                    InvalidArgument);
}

TEST_CASE("raising the obstacle never lowers the solution") {
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 4));
    SolverConfig cfg;
    const ProblemSpec lo = builtin_problem("snell-only");
    ProblemSpec hi = lo;
    hi.obstacle = [](double t, std::span<const double>) {
        return 1.0 - t + 0.1;
    };
    const SolutionField f_lo = solve_lipschitz(lo, noise, cfg);
    const SolutionField f_hi = solve_lipschitz(hi, noise, cfg);
    for (std::size_t p = 0; p < f_lo.paths; ++p)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(f_hi.Y(p, i) >= f_lo.Y(p, i));
}

TEST_CASE("tree solutions are measurable at each index") {
    const ProblemSpec spec = builtin_problem("lipschitz-markov");
    const std::size_t N = 3;
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, N));
    SolverConfig cfg;
    const SolutionField f = solve_lipschitz(spec, noise, cfg);
    for (std::size_t i = 0; i <= N; ++i) {
        const std::uint64_t mask =
            ((std::uint64_t{1} << i) - 1) |
            (((std::uint64_t{1} << (N - i)) - 1) << (N + i));
        std::map<std::uint64_t, std::pair<double, double>> rep;
        for (std::size_t p = 0; p < f.paths; ++p) {
            const auto key = p & mask;
            const auto it = rep.find(key);
            if (it == rep.end()) {
                rep[key] = {f.Y(p, i), f.Z(p, i)};
            } else {
                CHECK(it->second.first == f.Y(p, i));
                CHECK(it->second.second == f.Z(p, i));
            }
        }
    }
}

TEST_CASE("regression engine with saturated basis matches the tree engine") {
    const ProblemSpec spec = builtin_problem("lipschitz-markov");
    const NoiseBundle noise = enumerate_tree(make_grid(1.0, 4));
    SolverConfig tree_cfg;
    SolverConfig reg_cfg;
    reg_cfg.engine = Engine::regression;
    reg_cfg.basis.indicator = true;
    reg_cfg.basis.ridge = 0.0;
    const SolutionField a = solve_lipschitz(spec, noise, tree_cfg);
    const SolutionField b = solve_lipschitz(spec, noise, reg_cfg);
    double max_d = 0.0;
    for (std::size_t k = 0; k < a.y.size(); ++k)
        max_d = std::max(max_d, std::abs(a.y[k] - b.y[k]));
    for (std::size_t k = 0; k < a.z.size(); ++k)
        max_d = std::max(max_d, std::abs(a.z[k] - b.z[k]));
    CHECK(max_d <= 1e-10);
}

TEST_CASE("gaussian regression solve in two forward dimensions") {
    ProblemSpec spec = builtin_problem("additive-backward");
    spec.d = 2;
    spec.l = 2;
    spec.diffusion = DiffusionSpec{
        [](double, double, std::span<const double>, std::span<double> out) {
            for (double& v : out) v = 0.0;
        },
        0.1, 0.5, true};
    spec.terminal = [](std::span<const double> w) { return w[0] + w[1]; };
    const NoiseBundle noise = sample_noise(make_grid(1.0, 3), 4000, 2, 2, 9);
    SolverConfig cfg;
    cfg.engine = Engine::regression;
    const SolutionField f = solve_lipschitz(spec, noise, cfg);
    double mean0 = 0.0;
    for (std::size_t p = 0; p < f.paths; ++p) mean0 += f.Y(p, 0);
    mean0 /= double(f.paths);
    CHECK(std::abs(mean0) <= 0.1); // E[W_T . 1] = 0 at MC accuracy
    testsup::check_solution_triple(spec, noise, f, cfg);
}
