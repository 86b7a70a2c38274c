#include "rbdsde/verification.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "rbdsde/envelope.hpp"
#include "rbdsde/errors.hpp"

namespace rbdsde {

namespace {

constexpr double kAuditSlack = 1e-12;

/// Conditional average by exhaustive enumeration: bucket every path by its
/// known-at-i increments and average within buckets. Deliberately a
/// different algorithm from the production engine.
std::vector<double> enum_average(const NoiseBundle& tree, std::size_t i,
                                 std::span<const double> values) {
    const std::size_t n = tree.grid().steps;
    const std::size_t P = tree.paths();
    const std::uint64_t known_w = (std::uint64_t{1} << i) - 1;
    const std::uint64_t known_b =
        (((std::uint64_t{1} << (n - i)) - 1) << (n + i));
    const std::uint64_t mask = known_w | known_b;

    std::unordered_map<std::uint64_t, std::pair<double, std::size_t>> buckets;
    for (std::size_t p = 0; p < P; ++p) {
        auto& [sum, count] = buckets[p & mask];
        sum += values[p];
        ++count;
    }
    std::vector<double> out(P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto& [sum, count] = buckets[p & mask];
        out[p] = sum / static_cast<double>(count);
    }
    return out;
}

/// Root of y - m - dt f(y) = 0 by bisection to 1e-14. The map is strictly
/// increasing when dt C < 1, so the bracket expansion terminates.
double bisect_fixed_point(double m, double dt, const DriftFn& f, double t,
                          std::span<const double> z) {
    auto phi = [&](double y) { return y - m - dt * f(t, y, z); };
    double lo = m - 1.0, hi = m + 1.0;
    for (int k = 0; k < 200 && phi(lo) > 0.0; ++k) lo -= std::ldexp(1.0, k);
    for (int k = 0; k < 200 && phi(hi) < 0.0; ++k) hi += std::ldexp(1.0, k);
    if (phi(lo) > 0.0 || phi(hi) < 0.0)
        throw NumericalError("tree_bruteforce: could not bracket fixed point");
    for (int k = 0; k < 200 && hi - lo > 1e-14; ++k) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SolverConfig case_config(const ComparisonCase& cmp, const SolverConfig& cfg) {
    SolverConfig c = cfg;
    if (cmp.y_update_override) c.y_update = *cmp.y_update_override;
    return c;
}

} // namespace

double FieldDelta::max_all() const {
    return std::max(max_dy, std::max(max_dz, max_dk));
}

FieldDelta field_delta(const SolutionField& a, const SolutionField& b) {
    if (a.paths != b.paths || a.steps != b.steps || a.d != b.d)
        throw InvalidArgument("field_delta: shape mismatch");
    FieldDelta delta;
    for (std::size_t k = 0; k < a.y.size(); ++k)
        delta.max_dy = std::max(delta.max_dy, std::abs(a.y[k] - b.y[k]));
    for (std::size_t k = 0; k < a.z.size(); ++k)
        delta.max_dz = std::max(delta.max_dz, std::abs(a.z[k] - b.z[k]));
    for (std::size_t k = 0; k < a.dk.size(); ++k)
        delta.max_dk = std::max(delta.max_dk, std::abs(a.dk[k] - b.dk[k]));
    return delta;
}

ViolationReport compare(const ComparisonCase& cmp, const NoiseBundle& noise,
                        const SolverConfig& cfg, double tol) {
    const TimeGrid& grid = noise.grid();
    const std::size_t P = noise.paths();
    const std::size_t N = grid.steps;
    const std::size_t d = noise.dim_w();

    // (i) terminal order on every sampled path.
    for (std::size_t p = 0; p < P; ++p) {
        std::vector<double> w(d);
        for (std::size_t a = 0; a < d; ++a) w[a] = noise.w_at(p, N, a);
        const double x1 = cmp.spec1.terminal(w);
        const double x2 = cmp.spec2.terminal(w);
        if (x1 > x2 + kAuditSlack)
            throw HypothesisError(
                "compare[" + cmp.id + "]: terminal order violated on path " +
                std::to_string(p) + " (xi1 = " + std::to_string(x1) +
                " > xi2 = " + std::to_string(x2) + ")");
    }
    // (ii) obstacle order wherever both sides constrain.
    if (cmp.spec1.obstacle) {
        if (!cmp.spec2.obstacle)
            throw HypothesisError("compare[" + cmp.id +
                                  "]: spec1 reflected but spec2 is not");
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t i = 0; i <= N; ++i) {
                std::vector<double> w(d);
                for (std::size_t a = 0; a < d; ++a)
                    w[a] = noise.w_at(p, i, a);
                const double t = grid.node(i);
                const double s1 = (*cmp.spec1.obstacle)(t, w);
                const double s2 = (*cmp.spec2.obstacle)(t, w);
                if (s1 > s2 + kAuditSlack)
                    throw HypothesisError(
                        "compare[" + cmp.id +
                        "]: obstacle order violated at node " +
                        std::to_string(i));
            }
    }

    const SolverConfig run_cfg = case_config(cmp, cfg);
    SolutionField y2 = solve_lipschitz(cmp.spec2, noise, run_cfg);
    SolutionField y1 =
        cmp.spec1_minimal
            ? iterate_minimal(cmp.spec1, noise, run_cfg, cmp.scheme).field
            : solve_lipschitz(cmp.spec1, noise, run_cfg);

    // (iii) generator order along the solved trajectory of the regular side.
    const SolutionField& along = cmp.regular_side == 1 ? y2 : y1;
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<double> z(d);
            for (std::size_t a = 0; a < d; ++a) z[a] = along.Z(p, i, a);
            const double t = grid.node(i);
            const double f1 = cmp.spec1.generator.f(t, along.Y(p, i), z);
            const double f2 = cmp.spec2.generator.f(t, along.Y(p, i), z);
            if (f1 > f2 + kAuditSlack)
                throw HypothesisError(
                    "compare[" + cmp.id +
                    "]: generator order violated at path " +
                    std::to_string(p) + ", node " + std::to_string(i) +
                    " (f1 = " + std::to_string(f1) + " > f2 = " +
                    std::to_string(f2) + ")");
        }

    ViolationReport report;
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t i = 0; i <= N; ++i) {
            const double gap = y1.Y(p, i) - y2.Y(p, i);
            if (gap > report.max_positive_part) {
                report.max_positive_part = gap;
                report.witness_path = p;
                report.witness_node = i;
            }
            if (gap > tol) ++report.count_pathwise;
        }
    for (std::size_t i = 0; i <= N; ++i) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            const double gap = y1.Y(p, i) - y2.Y(p, i);
            mean += gap;
            sq += gap * gap;
        }
        mean /= static_cast<double>(P);
        const double var =
            std::max(sq / static_cast<double>(P) - mean * mean, 0.0);
        const double se = std::sqrt(var / static_cast<double>(P));
        if (se > 0.0 ? mean > 3.0 * se : mean > tol) ++report.count_mean_3se;
    }
    return report;
}

std::vector<ComparisonCase> comparison_bank() {
    std::vector<ComparisonCase> bank;

    auto flat_obstacle = [](double level) -> ObstacleFn {
        return [level](double, std::span<const double>) { return level; };
    };
    auto const_drift = [](double c) {
        GeneratorSpec g;
        g.f = [c](double, double, std::span<const double>) { return c; };
        g.growth_phi = [c](double) { return std::abs(c); };
        g.kappa = 0.1;
        g.lipschitz_C = 0.1;
        g.regularity = RegularityClass::lipschitz;
        g.z_free = true;
        return g;
    };

    { // Constant drifts 0 <= 1 under a far obstacle.
        ComparisonCase c;
        c.id = "t32-const-drift";
        c.spec1 = builtin_problem("step-generator");
        c.spec1.generator = const_drift(0.0);
        c.spec1.name = "const-drift-0";
        c.spec2 = builtin_problem("step-generator");
        c.spec2.generator = const_drift(1.0);
        c.spec2.name = "const-drift-1";
        bank.push_back(std::move(c));
    }
    { // Same Lipschitz generator, ordered terminals.
        ComparisonCase c;
        c.id = "t32-terminal-order";
        c.spec1 = builtin_problem("lipschitz-markov");
        const TerminalFn xi = c.spec1.terminal;
        c.spec1.terminal = [xi](std::span<const double> w) {
            return xi(w) - 0.5;
        };
        c.spec1.name = "lipschitz-markov-low";
        c.spec2 = builtin_problem("lipschitz-markov");
        bank.push_back(std::move(c));
    }
    { // Pure-reflection problems with ordered obstacles.
        ComparisonCase c;
        c.id = "t32-obstacle-order";
        c.spec1 = builtin_problem("snell-only");
        c.spec2 = builtin_problem("snell-only");
        c.spec2.obstacle = [](double t, std::span<const double>) {
            return 1.1 * (1.0 - t);
        };
        c.spec2.name = "snell-only-raised";
        bank.push_back(std::move(c));
    }
    { // The (resp.) variant: regularity carried by side 2.
        ComparisonCase c;
        c.id = "t32-resp-variant";
        c.spec1 = builtin_problem("lipschitz-markov");
        c.spec1.generator.f = [](double, double y, std::span<const double>) {
            return -0.5 * y;
        };
        c.spec1.generator.lipschitz_C = 0.5;
        c.spec1.generator.z_free = true;
        c.spec1.name = "lin-decay";
        c.spec2 = builtin_problem("lipschitz-markov");
        c.spec2.generator.f = [](double, double y, std::span<const double>) {
            return -0.5 * y + 1.0;
        };
        c.spec2.generator.growth_phi = [](double) { return 1.0; };
        c.spec2.generator.lipschitz_C = 0.5;
        c.spec2.generator.z_free = true;
        c.spec2.name = "lin-decay-shifted";
        c.regular_side = 2;
        bank.push_back(std::move(c));
    }
    { // Minimal solution of the step generator against a constant majorant.
        ComparisonCase c;
        c.id = "t33-minimal-vs-one";
        c.spec1 = builtin_problem("step-generator");
        c.spec1_minimal = true;
        c.spec2 = builtin_problem("step-generator");
        c.spec2.generator = const_drift(1.0);
        c.spec2.obstacle = flat_obstacle(-5.0);
        c.spec2.name = "const-one-majorant";
        bank.push_back(std::move(c));
    }
    for (double n : {2.0, 8.0, 32.0}) {
        // Envelope regularizations of the step generator stay below the
        // constant majorant. Large n breaks the implicit contraction bound
        // at coarse dt, so these run with the explicit update.
        ComparisonCase c;
        c.id = "t33-envelope-n" + std::to_string(static_cast<int>(n));
        c.spec1 = builtin_problem("step-generator");
        c.spec1.generator = envelope_generator(c.spec1.generator, n);
        c.spec1.name = "step-envelope-n" + std::to_string(static_cast<int>(n));
        c.spec2 = builtin_problem("step-generator");
        c.spec2.generator = const_drift(1.0);
        c.spec2.name = "const-one-majorant";
        c.y_update_override = YUpdate::explicit_y;
        bank.push_back(std::move(c));
    }
    return bank;
}

PositivityReport lemma_positivity(const GrowthFn& phi, const TerminalFn& xi,
                                  const MinorantSpec& h,
                                  const NoiseBundle& noise,
                                  const SolverConfig& cfg) {
    const TimeGrid& grid = noise.grid();
    const std::size_t d = noise.dim_w();

    for (std::size_t i = 0; i <= grid.steps; ++i)
        if (phi(grid.node(i)) < 0.0)
            throw HypothesisError("lemma_positivity: phi(t) < 0 at node " +
                                  std::to_string(i));
    for (std::size_t p = 0; p < noise.paths(); ++p) {
        std::vector<double> w(d);
        for (std::size_t a = 0; a < d; ++a) w[a] = noise.w_at(p, grid.steps, a);
        if (xi(w) < 0.0)
            throw HypothesisError("lemma_positivity: xi < 0 on path " +
                                  std::to_string(p));
    }

    PathDrift drift;
    const MinorantFn hf = h.h;
    drift.f = [hf, phi](std::size_t, std::size_t, double t, double y,
                        std::span<const double> z) {
        return hf(y, z) + phi(t);
    };
    drift.lipschitz = h.h_lipschitz;

    DiffusionSpec zero_g;
    zero_g.g = [](double, double, std::span<const double>,
                  std::span<double> out) {
        for (double& v : out) v = 0.0;
    };
    zero_g.is_zero = true;

    ObstacleFn at_zero = [](double, std::span<const double>) { return 0.0; };

    PositivityReport report;
    const SolutionField free_field =
        solve_reflected(drift, &zero_g, xi, nullptr, noise, cfg);
    const SolutionField refl_field =
        solve_reflected(drift, &zero_g, xi, &at_zero, noise, cfg);
    auto min_of = [](const SolutionField& f) {
        double m = std::numeric_limits<double>::infinity();
        for (double v : f.y) m = std::min(m, v);
        return m;
    };
    report.min_y_free = min_of(free_field);
    report.min_y_reflected = min_of(refl_field);
    return report;
}

std::vector<PositivityScenario> positivity_scenarios() {
    std::vector<PositivityScenario> v;
    {
        PositivityScenario s;
        s.id = "drift-only";
        s.phi = [](double) { return 1.0; };
        s.xi = [](std::span<const double>) { return 0.0; };
        s.h.h = [](double, std::span<const double>) { return 0.0; };
        s.h.h_lipschitz = 0.1;
        v.push_back(std::move(s));
    }
    {
        PositivityScenario s;
        s.id = "y-damped";
        s.phi = [](double) { return 0.5; };
        s.xi = [](std::span<const double>) { return 0.0; };
        s.h.h = [](double y, std::span<const double>) {
            return -0.1 * std::abs(y);
        };
        s.h.h_lipschitz = 0.1;
        v.push_back(std::move(s));
    }
    {
        PositivityScenario s;
        s.id = "z-damped";
        s.phi = [](double) { return 0.0; };
        s.xi = [](std::span<const double> w) {
            return std::abs(std::cos(w.empty() ? 0.0 : w[0]));
        };
        s.h.h = [](double, std::span<const double> z) {
            double n2 = 0.0;
            for (double zv : z) n2 += zv * zv;
            return -0.2 * std::sqrt(n2);
        };
        s.h.h_lipschitz = 0.2;
        v.push_back(std::move(s));
    }
    return v;
}

SolutionField snell_oracle(const ObstacleFn* obstacle, const TerminalFn& xi,
                           const NoiseBundle& tree) {
    if (tree.mode() != NoiseMode::rademacher_tree)
        throw InvalidArgument("snell_oracle: tree bundle required");
    const TimeGrid& grid = tree.grid();
    const std::size_t P = tree.paths();
    const std::size_t N = grid.steps;
    SolutionField field = SolutionField::zeros(P, N, 1);
    field.reflected = obstacle != nullptr;

    for (std::size_t p = 0; p < P; ++p) {
        std::vector<double> w{tree.w_at(p, N, 0)};
        field.Y(p, N) = xi(w);
    }
    std::vector<double> next(P), zt(P);
    for (std::size_t i = N; i-- > 0;) {
        for (std::size_t p = 0; p < P; ++p) {
            next[p] = field.Y(p, i + 1);
            zt[p] = field.Y(p, i + 1) * tree.dW(p, i, 0) / grid.dt;
        }
        const std::vector<double> m = enum_average(tree, i, next);
        const std::vector<double> zi = enum_average(tree, i, zt);
        for (std::size_t p = 0; p < P; ++p) {
            field.Z(p, i, 0) = zi[p];
            double yv = m[p];
            double dk = 0.0;
            if (obstacle) {
                std::vector<double> w{tree.w_at(p, i, 0)};
                const double s = (*obstacle)(grid.node(i), w);
                if (s > yv) {
                    yv = s;
                    dk = s - m[p];
                }
            }
            field.Y(p, i) = yv;
            field.dK(p, i) = std::max(dk, 0.0);
        }
    }
    return field;
}

SolutionField tree_bruteforce(const ProblemSpec& spec,
                              const NoiseBundle& tree,
                              const SolverConfig& cfg) {
    if (tree.mode() != NoiseMode::rademacher_tree)
        throw InvalidArgument("tree_bruteforce: tree bundle required");
    if (tree.grid().steps > 6)
        throw CapacityError("tree_bruteforce: N <= 6 required");
    if (spec.d != 1 || spec.l != 1)
        throw InvalidArgument("tree_bruteforce: d = l = 1 required");

    const TimeGrid& grid = tree.grid();
    const std::size_t P = tree.paths();
    const std::size_t N = grid.steps;
    const double dt = grid.dt;
    SolutionField field = SolutionField::zeros(P, N, 1);
    field.reflected = spec.obstacle.has_value();

    for (std::size_t p = 0; p < P; ++p) {
        std::vector<double> w{tree.w_at(p, N, 0)};
        field.Y(p, N) = spec.terminal(w);
    }

    std::vector<double> base(P), zt(P);
    for (std::size_t i = N; i-- > 0;) {
        const double t_i = grid.node(i);
        const double t_next = grid.node(i + 1);
        for (std::size_t p = 0; p < P; ++p) {
            std::vector<double> znext{field.Z(p, i + 1, 0)};
            std::vector<double> gv(1, 0.0);
            if (!spec.diffusion.is_zero)
                spec.diffusion.g(t_next, field.Y(p, i + 1), znext, gv);
            base[p] = field.Y(p, i + 1) + gv[0] * tree.dB(p, i, 0);
            zt[p] = base[p] * tree.dW(p, i, 0) / dt;
        }
        const std::vector<double> zi = enum_average(tree, i, zt);
        std::vector<double> m;
        if (cfg.y_update == YUpdate::explicit_y) {
            std::vector<double> target(P);
            for (std::size_t p = 0; p < P; ++p) {
                std::vector<double> z{zi[p]};
                target[p] = base[p] + dt * spec.generator.f(
                                               t_i, field.Y(p, i + 1), z);
            }
            m = enum_average(tree, i, target);
        } else {
            m = enum_average(tree, i, base);
        }
        for (std::size_t p = 0; p < P; ++p) {
            std::vector<double> z{zi[p]};
            field.Z(p, i, 0) = zi[p];
            double ystar = cfg.y_update == YUpdate::explicit_y
                               ? m[p]
                               : bisect_fixed_point(m[p], dt,
                                                    spec.generator.f, t_i, z);
            double yv = ystar;
            double dk = 0.0;
            if (spec.obstacle) {
                std::vector<double> w{tree.w_at(p, i, 0)};
                const double s = (*spec.obstacle)(t_i, w);
                if (ystar < s) {
                    yv = s;
                    dk = cfg.y_update == YUpdate::explicit_y
                             ? s - ystar
                             : s - m[p] - dt * spec.generator.f(t_i, s, z);
                }
            }
            field.Y(p, i) = yv;
            field.dK(p, i) = std::max(dk, 0.0);
        }
    }
    return field;
}

} // namespace rbdsde
