#include "rbdsde/solver.hpp"

#include <algorithm>
#include <cmath>

#include "rbdsde/errors.hpp"
#include "rbdsde/parallel.hpp"

namespace rbdsde {

namespace {

std::unique_ptr<CondExp> make_engine(const NoiseBundle& noise,
                                     const SolverConfig& cfg) {
    if (cfg.engine == Engine::tree) {
        if (noise.mode() != NoiseMode::rademacher_tree)
            throw InvalidArgument(
                "solver: tree engine requires a rademacher-tree bundle");
        return make_tree_condexp(noise);
    }
    return make_regression_condexp(noise, cfg.basis);
}

double picard_fixed_point(double m, double t, std::size_t p, std::size_t i,
                          std::span<const double> zrow, const PathDrift& drift,
                          double dt, const SolverConfig& cfg) {
    double y = m;
    for (int k = 0; k < cfg.picard_max; ++k) {
        const double next = m + dt * drift.f(p, i, t, y, zrow);
        if (std::abs(next - y) <= cfg.picard_tol) return next;
        y = next;
    }
    throw NumericalError("solver: Picard fixed point did not converge in " +
                         std::to_string(cfg.picard_max) + " iterations");
}

} // namespace

SolutionField SolutionField::zeros(std::size_t paths, std::size_t steps,
                                   std::size_t d) {
    SolutionField f;
    f.paths = paths;
    f.steps = steps;
    f.d = d;
    f.y.assign(paths * (steps + 1), 0.0);
    f.z.assign(paths * (steps + 1) * d, 0.0);
    f.dk.assign(paths * (steps + 1), 0.0);
    return f;
}

SolutionField solve_reflected(const PathDrift& drift, const DiffusionSpec* g,
                              const TerminalFn& terminal,
                              const ObstacleFn* obstacle,
                              const NoiseBundle& noise,
                              const SolverConfig& cfg) {
    const TimeGrid& grid = noise.grid();
    const std::size_t P = noise.paths();
    const std::size_t N = grid.steps;
    const std::size_t d = noise.dim_w();
    const std::size_t l = noise.dim_b();
    const double dt = grid.dt;

    if (cfg.y_update == YUpdate::implicit_y && !(dt * drift.lipschitz < 1.0))
        throw NumericalError(
            "solver: contraction violated, dt * C = " +
            std::to_string(dt * drift.lipschitz) + " >= 1");
    if (!(cfg.picard_tol > 0.0))
        throw InvalidArgument("solver: picard_tol must be > 0");

    auto engine = make_engine(noise, cfg);
    SolutionField field = SolutionField::zeros(P, N, d);
    field.reflected = obstacle != nullptr;
    field.engine = cfg.engine;

    // Terminal slice.
    par::for_each_index(P, [&](std::size_t p) {
        std::vector<double> w(d);
        for (std::size_t a = 0; a < d; ++a) w[a] = noise.w_at(p, N, a);
        field.Y(p, N) = terminal(w);
    });

    // Scratch rows reused across steps.
    std::vector<double> base(P);
    std::vector<std::vector<double>> ztarget(d, std::vector<double>(P));
    std::vector<double> m(P);
    std::vector<std::vector<double>> zfit(d, std::vector<double>(P));

    for (std::size_t i = N; i-- > 0;) {
        const double t_i = grid.node(i);
        const double t_next = grid.node(i + 1);

        par::for_each_index(P, [&](std::size_t p) {
            double gdb = 0.0;
            if (g != nullptr && !g->is_zero) {
                std::vector<double> gv(l);
                std::vector<double> znext(d);
                for (std::size_t a = 0; a < d; ++a)
                    znext[a] = field.Z(p, i + 1, a);
                g->g(t_next, field.Y(p, i + 1), znext, gv);
                for (std::size_t b = 0; b < l; ++b)
                    gdb += gv[b] * noise.dB(p, i, b);
            }
            base[p] = field.Y(p, i + 1) + gdb;
            for (std::size_t a = 0; a < d; ++a)
                ztarget[a][p] = base[p] * noise.dW(p, i, a) / dt;
        });

        if (cfg.y_update == YUpdate::implicit_y) {
            // One batched projection for the drift-free mean and z targets.
            std::vector<std::span<const double>> targets;
            std::vector<std::span<double>> outs;
            targets.emplace_back(base);
            outs.emplace_back(m);
            for (std::size_t a = 0; a < d; ++a) {
                targets.emplace_back(ztarget[a]);
                outs.emplace_back(zfit[a]);
            }
            engine->project(i, targets, outs);
        } else {
            // Explicit update: Z first, then the drift folded into the
            // conditional mean so the result stays known-at-i measurable.
            std::vector<std::span<const double>> zt;
            std::vector<std::span<double>> zo;
            for (std::size_t a = 0; a < d; ++a) {
                zt.emplace_back(ztarget[a]);
                zo.emplace_back(zfit[a]);
            }
            if (d > 0) engine->project(i, zt, zo);
            std::vector<double> ytarget(P);
            par::for_each_index(P, [&](std::size_t p) {
                std::vector<double> zrow(d);
                for (std::size_t a = 0; a < d; ++a) zrow[a] = zfit[a][p];
                ytarget[p] = base[p] + dt * drift.f(p, i, t_i,
                                                    field.Y(p, i + 1), zrow);
            });
            engine->project(i, {ytarget}, {std::span<double>(m)});
        }

        par::for_each_index(P, [&](std::size_t p) {
            std::vector<double> zrow(d);
            for (std::size_t a = 0; a < d; ++a) {
                zrow[a] = zfit[a][p];
                field.Z(p, i, a) = zrow[a];
            }
            double ystar;
            if (cfg.y_update == YUpdate::implicit_y)
                ystar = picard_fixed_point(m[p], t_i, p, i, zrow, drift, dt,
                                           cfg);
            else
                ystar = m[p];

            double yval = ystar;
            double dk = 0.0;
            if (obstacle != nullptr) {
                std::vector<double> w(d);
                for (std::size_t a = 0; a < d; ++a) w[a] = noise.w_at(p, i, a);
                const double s = (*obstacle)(t_i, w);
                if (ystar < s) {
                    yval = s;
                    if (cfg.y_update == YUpdate::implicit_y)
                        dk = s - m[p] - dt * drift.f(p, i, t_i, s, zrow);
                    else
                        dk = s - ystar;
                    dk = std::max(dk, 0.0);
                }
            }
            field.Y(p, i) = yval;
            field.dK(p, i) = dk;
        });
    }
    return field;
}

SolutionField solve_lipschitz(const ProblemSpec& spec,
                              const NoiseBundle& noise,
                              const SolverConfig& cfg) {
    if (!spec.generator.lipschitz_C)
        throw InvalidArgument(
            "solve_lipschitz: generator is not declared Lipschitz (wrap it "
            "with envelope_generator first)");
    PathDrift drift;
    const DriftFn f = spec.generator.f;
    drift.f = [f](std::size_t, std::size_t, double t, double y,
                  std::span<const double> z) { return f(t, y, z); };
    drift.lipschitz = *spec.generator.lipschitz_C;
    return solve_reflected(drift, &spec.diffusion, spec.terminal,
                           spec.obstacle ? &*spec.obstacle : nullptr, noise,
                           cfg);
}

ResidualReport residual_check(const ProblemSpec& spec,
                              const NoiseBundle& noise,
                              const SolutionField& field,
                              const SolverConfig& cfg) {
    const TimeGrid& grid = noise.grid();
    const std::size_t P = field.paths;
    const std::size_t N = field.steps;
    const std::size_t d = field.d;
    const std::size_t l = noise.dim_b();
    const double dt = grid.dt;

    auto engine = make_engine(noise, cfg);
    ResidualReport report;
    report.min_dk = 0.0;

    std::vector<double> residual(P);
    std::vector<double> projected(P);
    for (std::size_t i = 0; i < N; ++i) {
        const double t_i = grid.node(i);
        const double t_next = grid.node(i + 1);
        par::for_each_index(P, [&](std::size_t p) {
            std::vector<double> zrow(d), znext(d), gv(l);
            for (std::size_t a = 0; a < d; ++a) {
                zrow[a] = field.Z(p, i, a);
                znext[a] = field.Z(p, i + 1, a);
            }
            double gdb = 0.0;
            if (!spec.diffusion.is_zero) {
                spec.diffusion.g(t_next, field.Y(p, i + 1), znext, gv);
                for (std::size_t b = 0; b < l; ++b)
                    gdb += gv[b] * noise.dB(p, i, b);
            }
            double zdw = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                zdw += zrow[a] * noise.dW(p, i, a);
            residual[p] = field.Y(p, i) -
                          (field.Y(p, i + 1) +
                           dt * spec.generator.f(t_i, field.Y(p, i), zrow) +
                           gdb + field.dK(p, i) - zdw);
        });
        engine->project(i, {residual}, {std::span<double>(projected)});
        for (std::size_t p = 0; p < P; ++p) {
            report.max_projected_residual = std::max(
                report.max_projected_residual, std::abs(projected[p]));
            if (!std::isfinite(field.Y(p, i))) report.all_finite = false;
        }
    }

    // Definition invariants on the triple.
    for (std::size_t p = 0; p < P; ++p) {
        double skorokhod = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            report.min_dk = std::min(report.min_dk, field.dK(p, i));
            if (!std::isfinite(field.Y(p, i)) ||
                !std::isfinite(field.dK(p, i)))
                report.all_finite = false;
            if (spec.obstacle && field.reflected) {
                std::vector<double> w(d);
                for (std::size_t a = 0; a < d; ++a) w[a] = noise.w_at(p, i, a);
                const double s = (*spec.obstacle)(grid.node(i), w);
                report.max_obstacle_violation =
                    std::max(report.max_obstacle_violation,
                             std::max(s - field.Y(p, i), 0.0));
                skorokhod += field.dK(p, i) * (field.Y(p, i) - s);
            }
        }
        report.max_skorokhod =
            std::max(report.max_skorokhod, std::abs(skorokhod));
        report.k_terminal_max =
            std::max(report.k_terminal_max, field.K_terminal(p));
    }
    return report;
}

} // namespace rbdsde
