#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rbdsde/assumptions.hpp"
#include "rbdsde/model.hpp"

using namespace rbdsde;

namespace {
constexpr std::size_t kBudget = 2000;
}

TEST_CASE("unknown problem name is rejected") {
    CHECK_THROWS_AS(builtin_problem("no-such-problem"), InvalidArgument);
    CHECK(builtin_problem_names().size() == 5);
}

TEST_CASE("step generator passes growth and left-continuity audits") {
    const ProblemSpec spec = builtin_problem("step-generator");
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 7);
    CHECK(rep.passes(Hypothesis::H2));
    CHECK(rep.passes(Hypothesis::H3));
    CHECK(rep.passes(Hypothesis::H4)); // nondecreasing, z-free: h = 0 works
    CHECK(rep.passes(Hypothesis::H5));
    CHECK(rep.passes(Hypothesis::H6));
    CHECK(rep.passes(Hypothesis::H7));
    // The jump at 0 breaks joint continuity, and Lipschitz is undeclared.
    CHECK(rep.verdict(Hypothesis::H1) == Verdict::violated);
    CHECK(rep.verdict(Hypothesis::H0) == Verdict::not_checkable);
}

TEST_CASE("right-continuous step fails the left-continuity audit at 0") {
    ProblemSpec spec = builtin_problem("step-generator");
    spec.generator.f = [](double, double y, std::span<const double>) {
        return y >= 0.0 ? 1.0 : 0.0;
    };
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 7);
    CHECK(rep.verdict(Hypothesis::H3) == Verdict::violated);
    REQUIRE(rep.results.at(Hypothesis::H3).witness.has_value());
    const AuditWitness& w = *rep.results.at(Hypothesis::H3).witness;
    CHECK(std::abs(w.y) <= 1e-6);
    CHECK(w.detail.find("left limit") != std::string::npos);
}

TEST_CASE("zero generator passes everything it declares") {
    const ProblemSpec spec = builtin_problem("snell-only"); // f = 0
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 11);
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1, Hypothesis::H2,
                         Hypothesis::H3, Hypothesis::H4})
        CHECK(rep.passes(h));
    // S_T = 0 = xi: the equality case of the terminal-domination audit.
    CHECK(rep.passes(Hypothesis::H6));
}

TEST_CASE("additive-backward passes the increment bound with constant g") {
    const ProblemSpec spec = builtin_problem("additive-backward");
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 13);
    CHECK(rep.passes(Hypothesis::H7)); // increments of a constant vanish
    // The vanishing-at-zero side condition is reported separately and is
    // genuinely violated by g = 1.
    CHECK(rep.verdict(Hypothesis::GZero) == Verdict::violated);
}

TEST_CASE("lipschitz-markov audits clean except monotonicity") {
    const ProblemSpec spec = builtin_problem("lipschitz-markov");
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 17);
    for (Hypothesis h :
         {Hypothesis::H0, Hypothesis::H1, Hypothesis::H2, Hypothesis::H4,
          Hypothesis::H5, Hypothesis::H6, Hypothesis::H7, Hypothesis::GZero})
        CHECK(rep.passes(h));
    // f = -y + z decreases in y; the problem relies on H0 + H4, not H3.
    CHECK(rep.verdict(Hypothesis::H3) == Verdict::violated);
}

TEST_CASE("violated growth bound carries a witness") {
    ProblemSpec spec = builtin_problem("step-generator");
    spec.generator.f = [](double, double y, std::span<const double>) {
        return 3.0 + y * y;
    };
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 19);
    CHECK(rep.verdict(Hypothesis::H2) == Verdict::violated);
    CHECK(rep.results.at(Hypothesis::H2).witness.has_value());
}

TEST_CASE("minorant audit catches a decreasing jump") {
    ProblemSpec spec = builtin_problem("step-generator");
    spec.generator.f = [](double, double y, std::span<const double>) {
        return y > 0.0 ? -1.0 : 0.0; // jumps down: no continuous minorant
    };
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 23);
    CHECK(rep.verdict(Hypothesis::H3) == Verdict::violated);
}

TEST_CASE("problem overrides reach the constants") {
    ProblemOverrides ov;
    ov.drift_level = 2.5;
    ov.terminal_const = -1.0;
    const ProblemSpec spec = builtin_problem("linear-drift", ov);
    std::vector<double> z{0.0};
    CHECK(spec.generator.f(0.3, 4.0, z) == 2.5);
    std::vector<double> w{1.0};
    CHECK(spec.terminal(w) == -1.0);

    ProblemOverrides ov2;
    ov2.obstacle_level = -3.0;
    const ProblemSpec step = builtin_problem("step-generator", ov2);
    CHECK((*step.obstacle)(0.0, w) == -3.0);
}

TEST_CASE("H6 violation is caught when the obstacle exceeds the terminal") {
    ProblemSpec spec = builtin_problem("snell-only");
    spec.obstacle = [](double, std::span<const double>) { return 0.5; };
    const AssumptionReport rep = audit_assumptions(spec, kBudget, 29);
    CHECK(rep.verdict(Hypothesis::H6) == Verdict::violated);
}
