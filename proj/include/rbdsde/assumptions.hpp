#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbdsde/model.hpp"

namespace rbdsde {

/// Auditable hypotheses. GZero is the "g(.,0,0) vanishes" side condition,
/// reported separately from the H7 increment bound so that problems with a
/// harmless constant diffusion are not flagged on the increment inequality.
enum class Hypothesis { H0, H1, H2, H3, H4, H5, H6, H7, GZero };

enum class Verdict { pass, violated, not_checkable };

struct AuditWitness {
    double t = 0.0;
    double y = 0.0;
    std::vector<double> z;
    std::string detail;
};

struct HypothesisResult {
    Verdict verdict = Verdict::not_checkable;
    std::optional<AuditWitness> witness; // always present when violated
};

/// Falsification report: pass means "no counterexample found within the
/// sample budget", never a proof.
struct AssumptionReport {
    std::map<Hypothesis, HypothesisResult> results;
    std::size_t samples_used = 0;

    Verdict verdict(Hypothesis h) const { return results.at(h).verdict; }
    bool passes(Hypothesis h) const {
        return results.at(h).verdict == Verdict::pass;
    }
    /// True when none of the listed hypotheses is violated (not-checkable
    /// does not count against).
    bool no_violation(std::initializer_list<Hypothesis> hs) const {
        for (Hypothesis h : hs)
            if (results.at(h).verdict == Verdict::violated) return false;
        return true;
    }
};

/// Sampling box for the audit. The hypotheses quantify over all of
/// R x R^d, which is uncheckable; the box bounds the search.
struct AuditBox {
    double t_max = 1.0;
    double y_half = 5.0;
    double z_half = 5.0;
};

std::string to_string(Hypothesis h);
std::string to_string(Verdict v);

/// Samples (t, y, z) from the box (plus a fixed set of probe points around
/// the origin, where the bank's discontinuities live) and evaluates every
/// hypothesis inequality. Left/right continuity and monotonicity in y are
/// probed on nested dyadic offsets 2^-k.
AssumptionReport audit_assumptions(const ProblemSpec& spec,
                                   std::size_t budget, std::uint64_t seed,
                                   const AuditBox& box = {});

} // namespace rbdsde
