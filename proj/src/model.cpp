#include "rbdsde/model.hpp"

#include <cmath>

namespace rbdsde {

namespace {

GrowthFn constant_phi(double level) {
    return [level](double) { return level; };
}

DiffusionSpec zero_diffusion() {
    DiffusionSpec g;
    g.g = [](double, double, std::span<const double>, std::span<double> out) {
        for (double& v : out) v = 0.0;
    };
    g.g_C = 0.1;
    g.alpha = 0.5;
    g.is_zero = true;
    return g;
}

MinorantSpec zero_minorant() {
    MinorantSpec h;
    h.h = [](double, std::span<const double>) { return 0.0; };
    h.h_lipschitz = 0.1;
    return h;
}

double znorm(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

ProblemSpec step_generator(const ProblemOverrides& ov) {
    ProblemSpec spec;
    spec.name = "step-generator";
    spec.generator.f = [](double, double y, std::span<const double>) {
        return y > 0.0 ? 1.0 : 0.0;
    };
    spec.generator.growth_phi = constant_phi(ov.phi.value_or(1.0));
    spec.generator.kappa = ov.kappa.value_or(0.1);
    spec.generator.regularity = RegularityClass::left_continuous_nondecreasing;
    spec.generator.z_free = true;
    spec.diffusion = zero_diffusion();
    spec.minorant = zero_minorant();
    spec.terminal = [](std::span<const double>) { return 0.0; };
    const double level = ov.obstacle_level.value_or(-5.0);
    spec.obstacle = [level](double, std::span<const double>) { return level; };
    return spec;
}

ProblemSpec snell_only(const ProblemOverrides& ov) {
    ProblemSpec spec;
    spec.name = "snell-only";
    spec.generator.f = [](double, double, std::span<const double>) {
        return 0.0;
    };
    spec.generator.growth_phi = constant_phi(ov.phi.value_or(0.0));
    spec.generator.kappa = ov.kappa.value_or(0.1);
    spec.generator.lipschitz_C = 0.1;
    spec.generator.regularity = RegularityClass::lipschitz;
    spec.generator.z_free = true;
    spec.diffusion = zero_diffusion();
    spec.minorant = zero_minorant();
    spec.terminal = [](std::span<const double>) { return 0.0; };
    const double shift = ov.obstacle_level.value_or(0.0);
    spec.obstacle = [shift](double t, std::span<const double>) {
        return 1.0 - t + shift;
    };
    return spec;
}

ProblemSpec additive_backward(const ProblemOverrides& ov) {
    ProblemSpec spec;
    spec.name = "additive-backward";
    spec.generator.f = [](double, double, std::span<const double>) {
        return 0.0;
    };
    spec.generator.growth_phi = constant_phi(ov.phi.value_or(0.0));
    spec.generator.kappa = ov.kappa.value_or(0.1);
    spec.generator.lipschitz_C = 0.1;
    spec.generator.regularity = RegularityClass::lipschitz;
    spec.generator.z_free = true;
    spec.diffusion.g = [](double, double, std::span<const double>,
                          std::span<double> out) {
        for (double& v : out) v = 1.0;
    };
    spec.diffusion.g_C = 0.1;
    spec.diffusion.alpha = 0.5;
    spec.minorant = zero_minorant();
    spec.terminal = [](std::span<const double>) { return 0.0; };
    return spec;
}

ProblemSpec linear_drift(const ProblemOverrides& ov) {
    ProblemSpec spec;
    spec.name = "linear-drift";
    const double c = ov.drift_level.value_or(1.0);
    spec.generator.f = [c](double, double, std::span<const double>) {
        return c;
    };
    spec.generator.growth_phi = constant_phi(ov.phi.value_or(std::abs(c)));
    spec.generator.kappa = ov.kappa.value_or(0.1);
    spec.generator.lipschitz_C = 0.1;
    spec.generator.regularity = RegularityClass::lipschitz;
    spec.generator.z_free = true;
    spec.diffusion = zero_diffusion();
    spec.minorant = zero_minorant();
    const double xi = ov.terminal_const.value_or(2.0);
    spec.terminal = [xi](std::span<const double>) { return xi; };
    return spec;
}

ProblemSpec lipschitz_markov(const ProblemOverrides& ov) {
    ProblemSpec spec;
    spec.name = "lipschitz-markov";
    spec.generator.f = [](double, double y, std::span<const double> z) {
        return -y + (z.empty() ? 0.0 : z[0]);
    };
    spec.generator.growth_phi = constant_phi(ov.phi.value_or(0.0));
    spec.generator.kappa = ov.kappa.value_or(1.0);
    spec.generator.lipschitz_C = 1.0;
    spec.generator.regularity = RegularityClass::lipschitz;
    spec.diffusion.g = [](double, double y, std::span<const double>,
                          std::span<double> out) {
        for (double& v : out) v = 0.3 * y;
    };
    spec.diffusion.g_C = 0.09;
    spec.diffusion.alpha = 0.5;
    MinorantSpec h;
    h.h = [](double dy, std::span<const double> dz) {
        return -(std::abs(dy) + znorm(dz));
    };
    h.h_lipschitz = 1.0;
    spec.minorant = h;
    spec.terminal = [](std::span<const double> w) {
        return std::cos(w.empty() ? 0.0 : w[0]);
    };
    const double level = ov.obstacle_level.value_or(-2.0);
    spec.obstacle = [level](double, std::span<const double>) { return level; };
    return spec;
}

} // namespace

ProblemSpec builtin_problem(std::string_view name,
                            const ProblemOverrides& ov) {
    if (name == "step-generator") return step_generator(ov);
    if (name == "snell-only") return snell_only(ov);
    if (name == "additive-backward") return additive_backward(ov);
    if (name == "linear-drift") return linear_drift(ov);
    if (name == "lipschitz-markov") return lipschitz_markov(ov);
    throw InvalidArgument("builtin_problem: unknown problem name '" +
                          std::string(name) + "'");
}

std::vector<std::string> builtin_problem_names() {
    return {"step-generator", "snell-only", "additive-backward",
            "linear-drift", "lipschitz-markov"};
}

} // namespace rbdsde
