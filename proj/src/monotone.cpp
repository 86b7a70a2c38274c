#include "rbdsde/monotone.hpp"

#include <algorithm>
#include <cmath>

#include "rbdsde/errors.hpp"
#include "rbdsde/parallel.hpp"

namespace rbdsde {

namespace {

double znorm(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

PathDrift bracket_drift(const ProblemSpec& spec, double sign) {
    const double kappa = spec.generator.kappa;
    const GrowthFn phi = spec.generator.growth_phi;
    PathDrift drift;
    drift.f = [kappa, phi, sign](std::size_t, std::size_t, double t, double y,
                                 std::span<const double> z) {
        return sign * (kappa * std::abs(y) + kappa * znorm(z) + phi(t));
    };
    drift.lipschitz = kappa;
    return drift;
}

/// Per-iterate scalar statistics against the previous iterate and the
/// ceiling, accumulated in deterministic blocked order.
IterationState measure_step(int n, const SolutionField& cur,
                            const SolutionField& prev,
                            const SolutionField& ceiling,
                            const ProblemSpec& spec, const TimeGrid& grid) {
    IterationState st;
    st.n = n;
    const std::size_t P = cur.paths;
    const std::size_t N = cur.steps;
    const std::size_t d = cur.d;
    const double dt = grid.dt;

    double delta = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        const double mean_sq = par::blocked_sum(P, [&](std::size_t p) {
            const double dy = cur.Y(p, i) - prev.Y(p, i);
            return dy * dy;
        }) / static_cast<double>(P);
        delta = std::max(delta, mean_sq);
    }
    st.delta = delta;

    double energy = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        energy += par::blocked_sum(P, [&](std::size_t p) {
            double s = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double v = cur.Z(p, i, a);
                s += v * v;
            }
            return s;
        }) / static_cast<double>(P);
    st.z_energy = dt * energy;

    const double theta_sq = par::blocked_sum(P, [&](std::size_t p) {
        double s = 0.0;
        std::vector<double> zprev(d), dz(d);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t a = 0; a < d; ++a) {
                zprev[a] = prev.Z(p, i, a);
                dz[a] = cur.Z(p, i, a) - prev.Z(p, i, a);
            }
            const double theta =
                spec.generator.f(grid.node(i), prev.Y(p, i), zprev) +
                (spec.minorant
                     ? spec.minorant->h(cur.Y(p, i) - prev.Y(p, i), dz)
                     : 0.0);
            s += dt * theta * theta;
        }
        return s;
    }) / static_cast<double>(P);
    st.theta_norm = std::sqrt(theta_sq);

    double mono = std::numeric_limits<double>::infinity();
    double ceil_margin = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t i = 0; i <= N; ++i) {
            mono = std::min(mono, cur.Y(p, i) - prev.Y(p, i));
            ceil_margin = std::min(ceil_margin, ceiling.Y(p, i) - cur.Y(p, i));
        }
    st.min_monotone_margin = mono;
    st.min_ceiling_margin = ceil_margin;

    st.y0_mean = par::blocked_sum(P, [&](std::size_t p) {
        return cur.Y(p, 0);
    }) / static_cast<double>(P);
    return st;
}

ProblemSpec mirror_spec(const ProblemSpec& spec) {
    ProblemSpec m = spec;
    m.name = spec.name + "(mirrored)";
    const DriftFn f = spec.generator.f;
    m.generator.f = [f](double t, double y, std::span<const double> z) {
        std::vector<double> zn(z.size());
        for (std::size_t a = 0; a < z.size(); ++a) zn[a] = -z[a];
        return -f(t, -y, zn);
    };
    if (spec.generator.regularity == RegularityClass::right_continuous_decreasing)
        m.generator.regularity = RegularityClass::left_continuous_nondecreasing;
    const DiffusionFn g = spec.diffusion.g;
    m.diffusion.g = [g](double t, double y, std::span<const double> z,
                        std::span<double> out) {
        std::vector<double> zn(z.size());
        for (std::size_t a = 0; a < z.size(); ++a) zn[a] = -z[a];
        g(t, -y, zn, out);
        for (double& v : out) v = -v;
    };
    const TerminalFn xi = spec.terminal;
    m.terminal = [xi](std::span<const double> w) { return -xi(w); };
    return m;
}

void mirror_field_in_place(SolutionField& f) {
    for (double& v : f.y) v = -v;
    for (double& v : f.z) v = -v;
}

} // namespace

BracketPair solve_brackets(const ProblemSpec& spec, const NoiseBundle& noise,
                           const SolverConfig& cfg) {
    const ObstacleFn* obstacle =
        spec.obstacle ? &*spec.obstacle : nullptr;
    BracketPair pair{
        solve_reflected(bracket_drift(spec, -1.0), &spec.diffusion,
                        spec.terminal, obstacle, noise, cfg),
        solve_reflected(bracket_drift(spec, +1.0), &spec.diffusion,
                        spec.terminal, obstacle, noise, cfg)};
    return pair;
}

MinimalResult iterate_minimal(const ProblemSpec& spec,
                              const NoiseBundle& noise,
                              const SolverConfig& cfg,
                              const SchemeConfig& scheme) {
    if (!spec.minorant)
        throw InvalidArgument(
            "iterate_minimal: problem has no (Lipschitz) minorant h");
    if (scheme.max_n < 0)
        throw InvalidArgument("iterate_minimal: max_n must be >= 0");

    MinimalResult result;
    result.brackets = solve_brackets(spec, noise, cfg);
    const SolutionField& ceiling = result.brackets.ceiling;

    SolutionField prev = result.brackets.floor;
    if (scheme.max_n == 0) {
        result.field = std::move(prev);
        return result;
    }

    const DriftFn f = spec.generator.f;
    const MinorantFn h = spec.minorant->h;
    const TimeGrid& grid = noise.grid();
    const std::size_t d = noise.dim_w();
    const ObstacleFn* obstacle = spec.obstacle ? &*spec.obstacle : nullptr;

    for (int n = 1; n <= scheme.max_n; ++n) {
        PathDrift frozen;
        frozen.lipschitz = spec.minorant->h_lipschitz;
        frozen.f = [&f, &h, &prev, &grid, d](std::size_t p, std::size_t i,
                                             double t, double y,
                                             std::span<const double> z) {
            std::vector<double> zprev(d), dz(d);
            for (std::size_t a = 0; a < d; ++a) {
                zprev[a] = prev.Z(p, i, a);
                dz[a] = z[a] - zprev[a];
            }
            return f(t, prev.Y(p, i), zprev) + h(y - prev.Y(p, i), dz);
        };
        SolutionField cur = solve_reflected(frozen, &spec.diffusion,
                                            spec.terminal, obstacle, noise,
                                            cfg);
        IterationState st = measure_step(n, cur, prev, ceiling, spec, grid);
        result.trace.states.push_back(st);

        if (st.min_monotone_margin < -scheme.monotone_guard) {
            // Locate the first offending node for the diagnostic.
            for (std::size_t p = 0; p < cur.paths; ++p)
                for (std::size_t i = 0; i <= cur.steps; ++i)
                    if (cur.Y(p, i) - prev.Y(p, i) <
                        -scheme.monotone_guard)
                        throw NumericalError(
                            "iterate_minimal: non-monotone step at n=" +
                            std::to_string(n) + ", path " +
                            std::to_string(p) + ", node " +
                            std::to_string(i) + " (margin " +
                            std::to_string(cur.Y(p, i) - prev.Y(p, i)) +
                            "); the minorant likely fails its hypothesis");
        }
        prev = std::move(cur);
        if (st.delta < scheme.tol) break;
    }
    result.field = std::move(prev);
    return result;
}

MinimalResult iterate_maximal(const ProblemSpec& spec,
                              const NoiseBundle& noise,
                              const SolverConfig& cfg,
                              const SchemeConfig& scheme) {
    if (spec.obstacle)
        throw InvalidArgument(
            "iterate_maximal: only obstacle-free problems are supported "
            "(mirroring would turn the obstacle into an upper barrier)");
    MinimalResult mirrored =
        iterate_minimal(mirror_spec(spec), noise, cfg, scheme);
    mirror_field_in_place(mirrored.field);
    return mirrored;
}

DiagnosticsReport diagnostics(const IterationTrace& trace) {
    DiagnosticsReport rep;
    for (const IterationState& st : trace.states) {
        rep.monotone_margins.push_back(st.min_monotone_margin);
        rep.ceiling_margins.push_back(st.min_ceiling_margin);
        rep.z_energy.push_back(st.z_energy);
        rep.theta_norm.push_back(st.theta_norm);
        rep.delta.push_back(st.delta);
    }

    // Geometric fit over the positive deltas: log delta_n ~ a + (n-1) log rho.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < rep.delta.size(); ++k)
        if (rep.delta[k] > 0.0)
            pts.emplace_back(static_cast<double>(k), std::log(rep.delta[k]));
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double nn = static_cast<double>(pts.size());
        const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
        // delta is a squared quantity; report the per-step ratio of deltas.
        rep.geometric_rho = std::exp(slope);
    }

    if (!rep.z_energy.empty()) {
        std::vector<double> sorted = rep.z_energy;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double mx = sorted.back();
        rep.z_energy_max_over_median =
            median > 0.0 ? mx / median
                         : (mx > 0.0
                                ? std::numeric_limits<double>::infinity()
                                : 1.0);
    }
    return rep;
}

} // namespace rbdsde
