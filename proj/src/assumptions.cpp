#include "rbdsde/assumptions.hpp"

#include <cmath>
#include <limits>

#include "rbdsde/philox.hpp"

namespace rbdsde {

namespace {

constexpr int kDyadicMin = 2;   // offsets 2^-2 .. 2^-26
constexpr int kDyadicMax = 26;
constexpr double kIneqSlack = 1e-12; // rounding slack on audited inequalities
constexpr double kJumpTol = 1e-6;    // smallest gap treated as a jump

double znorm(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

struct SamplePoint {
    double t;
    double y;
    std::vector<double> z;
};

struct Auditor {
    const ProblemSpec& spec;
    const AuditBox& box;
    std::uint64_t seed;
    AssumptionReport report;

    void init() {
        for (Hypothesis h :
             {Hypothesis::H0, Hypothesis::H1, Hypothesis::H2, Hypothesis::H3,
              Hypothesis::H4, Hypothesis::H5, Hypothesis::H6, Hypothesis::H7,
              Hypothesis::GZero})
            report.results[h] = {Verdict::pass, std::nullopt};
        if (!spec.generator.lipschitz_C)
            report.results[Hypothesis::H0].verdict = Verdict::not_checkable;
        if (!spec.minorant)
            report.results[Hypothesis::H4].verdict = Verdict::not_checkable;
    }

    void flag(Hypothesis h, const SamplePoint& at, std::string detail) {
        auto& r = report.results[h];
        if (r.verdict == Verdict::violated) return; // keep first witness
        r.verdict = Verdict::violated;
        r.witness = AuditWitness{at.t, at.y, at.z, std::move(detail)};
    }

    double f(double t, double y, std::span<const double> z) const {
        return spec.generator.f(t, y, z);
    }

    /// Estimated one-sided limit of f in y at distance 2^-kDyadicMax,
    /// together with a stabilization flag: the last two ladder values must
    /// agree much better than they agree with f(y) before a gap is called a
    /// jump rather than a steep slope.
    bool one_sided_jump(const SamplePoint& s, int dir, double& gap) const {
        const double base = f(s.t, s.y, s.z);
        double prev = std::numeric_limits<double>::quiet_NaN();
        double last = base;
        for (int k = kDyadicMin; k <= kDyadicMax; ++k) {
            prev = last;
            last = f(s.t, s.y + dir * std::ldexp(1.0, -k), s.z);
        }
        gap = last - base;
        const double settle = std::abs(last - prev);
        return std::abs(gap) > kJumpTol && settle <= 0.25 * std::abs(gap);
    }

    bool z_jump(const SamplePoint& s, std::size_t axis, int dir,
                double& gap) const {
        const double base = f(s.t, s.y, s.z);
        std::vector<double> z(s.z.begin(), s.z.end());
        double prev = std::numeric_limits<double>::quiet_NaN();
        double last = base;
        for (int k = kDyadicMin; k <= kDyadicMax; ++k) {
            prev = last;
            z[axis] = s.z[axis] + dir * std::ldexp(1.0, -k);
            last = f(s.t, s.y, z);
        }
        gap = last - base;
        const double settle = std::abs(last - prev);
        return std::abs(gap) > kJumpTol && settle <= 0.25 * std::abs(gap);
    }

    void check_point(const SamplePoint& s) {
        const double fv = f(s.t, s.y, s.z);

        // H2 growth bound.
        const double bound = spec.generator.growth_phi(s.t) +
                             spec.generator.kappa * (std::abs(s.y) + znorm(s.z));
        if (std::abs(fv) > bound + kIneqSlack)
            flag(Hypothesis::H2, s,
                 "|f| = " + std::to_string(std::abs(fv)) +
                     " exceeds phi + kappa(|y|+|z|) = " + std::to_string(bound));

        // H1 joint continuity: any one-sided jump in y or z violates it.
        double gap = 0.0;
        if (report.results[Hypothesis::H1].verdict == Verdict::pass) {
            if (one_sided_jump(s, -1, gap) || one_sided_jump(s, +1, gap))
                flag(Hypothesis::H1, s, "jump of size " + std::to_string(gap) +
                                            " in y");
            else {
                for (std::size_t a = 0;
                     a < spec.d &&
                     report.results[Hypothesis::H1].verdict == Verdict::pass;
                     ++a)
                    if (z_jump(s, a, -1, gap) || z_jump(s, a, +1, gap))
                        flag(Hypothesis::H1, s,
                             "jump of size " + std::to_string(gap) + " in z[" +
                                 std::to_string(a) + "]");
            }
        }

        // H3 left-continuity and monotonicity in y, continuity in z.
        if (report.results[Hypothesis::H3].verdict == Verdict::pass) {
            if (one_sided_jump(s, -1, gap)) {
                flag(Hypothesis::H3, s,
                     "left limit estimate differs from value by " +
                         std::to_string(-gap));
            } else {
                for (int k = kDyadicMin; k <= kDyadicMax; ++k) {
                    const double up =
                        f(s.t, s.y + std::ldexp(1.0, -k), s.z);
                    if (up < fv - kIneqSlack) {
                        flag(Hypothesis::H3, s,
                             "f decreases across +2^-" + std::to_string(k));
                        break;
                    }
                }
            }
        }
        if (report.results[Hypothesis::H3].verdict == Verdict::pass) {
            for (std::size_t a = 0; a < spec.d; ++a)
                if (z_jump(s, a, -1, gap) || z_jump(s, a, +1, gap)) {
                    flag(Hypothesis::H3, s,
                         "jump in z[" + std::to_string(a) + "]");
                    break;
                }
        }
    }

    void check_pair(const SamplePoint& a, const SamplePoint& b) {
        // Pairs share the time slot: the regularity hypotheses quantify over
        // (y, z) at fixed t.
        const double t = a.t;
        const double fa = f(t, a.y, a.z);
        const double fb = f(t, b.y, b.z);
        const double dy = a.y - b.y;
        std::vector<double> dz(spec.d);
        for (std::size_t k = 0; k < spec.d; ++k) dz[k] = a.z[k] - b.z[k];

        if (spec.generator.lipschitz_C) {
            const double rhs = *spec.generator.lipschitz_C *
                               (std::abs(dy) + znorm(dz));
            if (std::abs(fa - fb) > rhs + kIneqSlack)
                flag(Hypothesis::H0, a,
                     "|f(a)-f(b)| = " + std::to_string(std::abs(fa - fb)) +
                         " exceeds C(|dy|+|dz|) = " + std::to_string(rhs));
        }

        // H3 monotonicity on the pair (same z required).
        if (report.results[Hypothesis::H3].verdict == Verdict::pass) {
            const double f_hi = f(t, std::max(a.y, b.y), a.z);
            const double f_lo = f(t, std::min(a.y, b.y), a.z);
            if (f_hi < f_lo - kIneqSlack)
                flag(Hypothesis::H3, a, "f not nondecreasing in y");
        }

        if (spec.minorant &&
            report.results[Hypothesis::H4].verdict == Verdict::pass) {
            const auto& m = *spec.minorant;
            const double hv = m.h(dy, dz);
            if (std::abs(hv) >
                spec.generator.kappa * (std::abs(dy) + znorm(dz)) + kIneqSlack)
                flag(Hypothesis::H4, a, "|h| exceeds kappa(|dy|+|dz|)");
            // Minorant property with the points ordered y_hi >= y_lo.
            const SamplePoint& hi = a.y >= b.y ? a : b;
            const SamplePoint& lo = a.y >= b.y ? b : a;
            std::vector<double> d2(spec.d);
            for (std::size_t k = 0; k < spec.d; ++k) d2[k] = hi.z[k] - lo.z[k];
            const double lhs = f(t, hi.y, hi.z) - f(t, lo.y, lo.z);
            const double rhs = m.h(hi.y - lo.y, d2);
            if (lhs < rhs - kIneqSlack)
                flag(Hypothesis::H4, hi,
                     "f(hi)-f(lo) = " + std::to_string(lhs) +
                         " below h = " + std::to_string(rhs));
        }

        // H7 increment bound and the g(.,0,0) side condition.
        {
            std::vector<double> ga(spec.l), gb(spec.l);
            spec.diffusion.g(t, a.y, a.z, ga);
            spec.diffusion.g(t, b.y, b.z, gb);
            double lhs = 0.0;
            for (std::size_t k = 0; k < spec.l; ++k)
                lhs += (ga[k] - gb[k]) * (ga[k] - gb[k]);
            double dz2 = 0.0;
            for (double v : dz) dz2 += v * v;
            const double rhs =
                spec.diffusion.g_C * dy * dy + spec.diffusion.alpha * dz2;
            if (lhs > rhs + kIneqSlack)
                flag(Hypothesis::H7, a, "|g(a)-g(b)|^2 exceeds C|dy|^2 + alpha|dz|^2");

            std::vector<double> zero(spec.d, 0.0), g0(spec.l);
            spec.diffusion.g(t, 0.0, zero, g0);
            if (znorm(g0) > kIneqSlack)
                flag(Hypothesis::GZero, {t, 0.0, zero},
                     "g(t,0,0) = " + std::to_string(znorm(g0)));
        }
    }

    void check_terminal(std::span<const double> w, double t_terminal) {
        const double xi = spec.terminal(w);
        SamplePoint at{t_terminal, w.empty() ? 0.0 : w[0], {}};
        if (!std::isfinite(xi)) {
            flag(Hypothesis::H5, at, "terminal value not finite");
            return;
        }
        if (spec.obstacle) {
            const double sT = (*spec.obstacle)(t_terminal, w);
            if (sT > xi + kIneqSlack)
                flag(Hypothesis::H6, at,
                     "S_T = " + std::to_string(sT) + " exceeds xi = " +
                         std::to_string(xi));
        }
    }
};

} // namespace

std::string to_string(Hypothesis h) {
    switch (h) {
        case Hypothesis::H0: return "H0";
        case Hypothesis::H1: return "H1";
        case Hypothesis::H2: return "H2";
        case Hypothesis::H3: return "H3";
        case Hypothesis::H4: return "H4";
        case Hypothesis::H5: return "H5";
        case Hypothesis::H6: return "H6";
        case Hypothesis::H7: return "H7";
        case Hypothesis::GZero: return "g-zero";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::violated: return "violated";
        case Verdict::not_checkable: return "not-checkable";
    }
    return "?";
}

AssumptionReport audit_assumptions(const ProblemSpec& spec,
                                   std::size_t budget, std::uint64_t seed,
                                   const AuditBox& box) {
    if (budget < 1) throw InvalidArgument("audit_assumptions: budget >= 1");
    Auditor a{spec, box, seed, {}};
    a.init();

    auto draw = [&](std::uint64_t idx, std::uint32_t slot, double lo,
                    double hi) {
        return lo + (hi - lo) * uniform_draw(seed, idx, 0xA0D17u, slot);
    };
    auto sample = [&](std::uint64_t idx) {
        SamplePoint s;
        s.t = draw(idx, 0, 0.0, box.t_max);
        s.y = draw(idx, 1, -box.y_half, box.y_half);
        s.z.resize(spec.d);
        for (std::size_t k = 0; k < spec.d; ++k)
            s.z[k] =
                draw(idx, 2 + static_cast<std::uint32_t>(k), -box.z_half,
                     box.z_half);
        return s;
    };

    // Fixed probes at and around the origin, where the bank's
    // discontinuities sit; y = 0 is always audited.
    const double probe_y[] = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
    std::vector<double> z0(spec.d, 0.0);
    for (double y : probe_y) {
        SamplePoint s{0.5 * box.t_max, y, z0};
        a.check_point(s);
    }

    SamplePoint prev{0.0, 0.0, {}};
    bool have_prev = false;
    for (std::size_t n = 0; n < budget; ++n) {
        SamplePoint s = sample(n);
        a.check_point(s);
        if (have_prev) {
            SamplePoint mate = prev;
            mate.t = s.t;
            a.check_pair(s, mate);
        }
        prev = s;
        have_prev = true;
        // Terminal/obstacle samples: w ~ box-uniform per axis.
        std::vector<double> w(spec.d);
        for (std::size_t k = 0; k < spec.d; ++k)
            w[k] = draw(n, 100 + static_cast<std::uint32_t>(k), -box.y_half,
                        box.y_half);
        a.check_terminal(w, box.t_max);
    }
    a.report.samples_used = budget;
    return a.report;
}

} // namespace rbdsde
