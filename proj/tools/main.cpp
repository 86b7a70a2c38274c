#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rbdsde/config.hpp"
#include "rbdsde/csv.hpp"
#include "rbdsde/envelope.hpp"
#include "rbdsde/errors.hpp"
#include "rbdsde/manifest.hpp"
#include "rbdsde/parallel.hpp"
#include "rbdsde/verification.hpp"

namespace {

using namespace rbdsde;

std::string fmt(double v) { return CsvWriter::format_double(v); }

NoiseBundle make_noise(const RunConfig& cfg) {
    const TimeGrid grid = make_grid(cfg.horizon, cfg.steps);
    if (cfg.noise_mode == NoiseMode::rademacher_tree)
        return enumerate_tree(grid);
    return sample_noise(grid, cfg.paths, cfg.d, cfg.l, cfg.seed);
}

/// Little-endian field dump: magic "RBDS", u32 version, u32 N, u32 P,
/// u32 d, u32 l, then row-major doubles Y (P x (N+1)), Z (P x (N+1) x d),
/// dK (P x (N+1)).
void dump_field(const SolutionField& field, std::size_t l,
                const std::string& path) {
    std::string bytes;
    bytes.append("RBDS", 4);
    auto put_u32 = [&bytes](std::uint32_t v) {
        char buf[4];
        std::memcpy(buf, &v, 4);
        bytes.append(buf, 4);
    };
    put_u32(1);
    put_u32(static_cast<std::uint32_t>(field.steps));
    put_u32(static_cast<std::uint32_t>(field.paths));
    put_u32(static_cast<std::uint32_t>(field.d));
    put_u32(static_cast<std::uint32_t>(l));
    auto put_doubles = [&bytes](const std::vector<double>& v) {
        bytes.append(reinterpret_cast<const char*>(v.data()),
                     v.size() * sizeof(double));
    };
    put_doubles(field.y);
    put_doubles(field.z);
    put_doubles(field.dk);
    atomic_write(path, bytes);
}

int run_check_assumptions(const RunConfig& cfg, RunManifest& manifest) {
    const ProblemSpec spec = cfg.make_problem();
    const AssumptionReport report =
        audit_assumptions(spec, cfg.audit_budget, cfg.seed, cfg.audit_box);
    CsvWriter csv({"hypothesis", "verdict", "witness_t", "witness_y",
                   "witness_z0", "detail"});
    std::size_t violated = 0;
    for (const auto& [h, r] : report.results) {
        std::vector<std::string> row{to_string(h), to_string(r.verdict),
                                     "", "", "", ""};
        if (r.witness) {
            row[2] = fmt(r.witness->t);
            row[3] = fmt(r.witness->y);
            row[4] = r.witness->z.empty() ? "" : fmt(r.witness->z[0]);
            row[5] = r.witness->detail;
        }
        if (r.verdict == Verdict::violated) ++violated;
        csv.add_row(row);
    }
    const std::string path = cfg.out_dir + "/check-assumptions.csv";
    csv.write_file(path);
    manifest.add_output(path);
    manifest.add_metric("violated", static_cast<double>(violated));
    manifest.add_metric("samples_used",
                        static_cast<double>(report.samples_used));
    return 0;
}

int run_envelope(const RunConfig& cfg, RunManifest& manifest) {
    const ProblemSpec spec = cfg.make_problem();
    std::vector<double> z(spec.d, 0.0);
    auto tab = GridFunction1D::tabulate(
        cfg.envelope_y_min, cfg.envelope_y_max, cfg.envelope_points,
        [&](double y) { return spec.generator.f(cfg.envelope_t, y, z); });
    const EnvelopeDirection dir =
        spec.generator.regularity ==
                RegularityClass::right_continuous_decreasing
            ? EnvelopeDirection::sup
            : EnvelopeDirection::inf;

    std::vector<std::string> header{"y", "f"};
    std::vector<GridFunction1D> envs;
    for (double n : cfg.envelope_levels) {
        header.push_back("f_n" + fmt(n));
        envs.push_back(dir == EnvelopeDirection::inf ? inf_envelope(tab, n)
                                                     : sup_envelope(tab, n));
    }
    CsvWriter csv(header);
    for (std::size_t k = 0; k < tab.points(); ++k) {
        std::vector<std::string> row{fmt(tab.node(k)), fmt(tab.values[k])};
        for (const auto& e : envs) row.push_back(fmt(e.values[k]));
        csv.add_row(row);
    }
    const std::string path = cfg.out_dir + "/envelope.csv";
    csv.write_file(path);
    manifest.add_output(path);
    return 0;
}

void write_field_csv(const SolutionField& field, const TimeGrid& grid,
                     const std::string& path) {
    CsvWriter csv({"t", "mean_y", "stderr_y", "mean_k", "mean_z_norm"});
    const std::size_t P = field.paths;
    std::vector<double> k_running(P, 0.0);
    for (std::size_t i = 0; i <= field.steps; ++i) {
        const double mean = par::blocked_sum(P, [&](std::size_t p) {
            return field.Y(p, i);
        }) / static_cast<double>(P);
        const double sq = par::blocked_sum(P, [&](std::size_t p) {
            const double v = field.Y(p, i) - mean;
            return v * v;
        }) / static_cast<double>(P);
        const double stderr_y =
            P > 1 ? std::sqrt(sq / static_cast<double>(P)) : 0.0;
        const double mean_k = par::blocked_sum(P, [&](std::size_t p) {
            return k_running[p];
        }) / static_cast<double>(P);
        const double mean_znorm = par::blocked_sum(P, [&](std::size_t p) {
            double s = 0.0;
            for (std::size_t a = 0; a < field.d; ++a) {
                const double v = field.Z(p, i, a);
                s += v * v;
            }
            return std::sqrt(s);
        }) / static_cast<double>(P);
        csv.add_row({fmt(grid.node(i)), fmt(mean), fmt(stderr_y), fmt(mean_k),
                     fmt(mean_znorm)});
        for (std::size_t p = 0; p < P; ++p) k_running[p] += field.dK(p, i);
    }
    csv.write_file(path);
}

int run_solve(const RunConfig& cfg, RunManifest& manifest) {
    const ProblemSpec spec = cfg.make_problem();
    const NoiseBundle noise = make_noise(cfg);
    const SolutionField field = solve_lipschitz(spec, noise, cfg.solver);
    const std::string path = cfg.out_dir + "/solve.csv";
    write_field_csv(field, noise.grid(), path);
    manifest.add_output(path);
    if (cfg.dump_field) {
        const std::string bin = cfg.out_dir + "/solve_field.bin";
        dump_field(field, noise.dim_b(), bin);
        manifest.add_output(bin);
    }
    const double y0 = par::blocked_sum(field.paths, [&](std::size_t p) {
        return field.Y(p, 0);
    }) / static_cast<double>(field.paths);
    manifest.add_metric("y0_mean", y0);
    return 0;
}

int run_iterate(const RunConfig& cfg, bool maximal, RunManifest& manifest) {
    const ProblemSpec spec = cfg.make_problem();
    const NoiseBundle noise = make_noise(cfg);
    const MinimalResult result =
        maximal ? iterate_maximal(spec, noise, cfg.solver, cfg.scheme)
                : iterate_minimal(spec, noise, cfg.solver, cfg.scheme);
    CsvWriter csv({"n", "delta", "z_energy", "min_monotone_margin",
                   "y0_mean"});
    for (const IterationState& st : result.trace.states)
        csv.add_row({std::to_string(st.n), fmt(st.delta), fmt(st.z_energy),
                     fmt(st.min_monotone_margin), fmt(st.y0_mean)});
    const std::string path = cfg.out_dir + "/iterate.csv";
    csv.write_file(path);
    manifest.add_output(path);

    const double y0 =
        par::blocked_sum(result.field.paths, [&](std::size_t p) {
            return result.field.Y(p, 0);
        }) / static_cast<double>(result.field.paths);
    manifest.add_metric("y0_mean", y0);
    manifest.add_metric("iterations",
                        static_cast<double>(result.trace.states.size()));
    if (!result.trace.states.empty())
        manifest.add_metric("final_delta",
                            result.trace.states.back().delta);
    return 0;
}

int run_compare(const RunConfig& cfg, RunManifest& manifest) {
    const NoiseBundle noise = make_noise(cfg);
    CsvWriter csv({"case", "max_violation", "count", "count_mean_3se",
                   "witness_path", "witness_node"});
    std::size_t total = 0;
    for (const ComparisonCase& cmp : comparison_bank()) {
        if (!cfg.compare_case.empty() && cmp.id != cfg.compare_case) continue;
        ComparisonCase run = cmp;
        run.scheme = cfg.scheme;
        const ViolationReport rep =
            compare(run, noise, cfg.solver, cfg.compare_tol);
        const std::size_t count =
            cfg.noise_mode == NoiseMode::rademacher_tree ? rep.count_pathwise
                                                         : rep.count_mean_3se;
        total += count;
        csv.add_row({cmp.id, fmt(rep.max_positive_part),
                     std::to_string(rep.count_pathwise),
                     std::to_string(rep.count_mean_3se),
                     std::to_string(rep.witness_path),
                     std::to_string(rep.witness_node)});
    }
    const std::string path = cfg.out_dir + "/compare.csv";
    csv.write_file(path);
    manifest.add_output(path);
    manifest.add_metric("total_violations", static_cast<double>(total));
    return 0;
}

int run_lemma(const RunConfig& cfg, RunManifest& manifest) {
    const NoiseBundle noise = make_noise(cfg);
    CsvWriter csv({"scenario", "min_y_reflected", "min_y_free"});
    double worst = 0.0;
    for (const PositivityScenario& sc : positivity_scenarios()) {
        const PositivityReport rep =
            lemma_positivity(sc.phi, sc.xi, sc.h, noise, cfg.solver);
        worst = std::min(worst, std::min(rep.min_y_free,
                                         rep.min_y_reflected));
        csv.add_row({sc.id, fmt(rep.min_y_reflected), fmt(rep.min_y_free)});
    }
    const std::string path = cfg.out_dir + "/lemma.csv";
    csv.write_file(path);
    manifest.add_output(path);
    manifest.add_metric("min_y", worst);
    return 0;
}

int run_oracle(const RunConfig& cfg, RunManifest& manifest) {
    if (cfg.noise_mode != NoiseMode::rademacher_tree)
        throw InvalidArgument("oracle: tree noise required");
    const NoiseBundle noise = make_noise(cfg);
    SolverConfig solver = cfg.solver;
    solver.engine = Engine::tree;

    CsvWriter csv({"case", "max_dy", "max_dz", "max_dk"});
    double worst = 0.0;
    for (const std::string& name :
         {std::string("linear-drift"), std::string("lipschitz-markov"),
          std::string("additive-backward")}) {
        const ProblemSpec spec = builtin_problem(name);
        const FieldDelta delta =
            field_delta(solve_lipschitz(spec, noise, solver),
                        tree_bruteforce(spec, noise, solver));
        worst = std::max(worst, delta.max_all());
        csv.add_row({name, fmt(delta.max_dy), fmt(delta.max_dz),
                     fmt(delta.max_dk)});
    }
    {
        const ProblemSpec spec = builtin_problem("snell-only");
        const FieldDelta delta = field_delta(
            solve_lipschitz(spec, noise, solver),
            snell_oracle(&*spec.obstacle, spec.terminal, noise));
        worst = std::max(worst, delta.max_all());
        csv.add_row({"snell-only", fmt(delta.max_dy), fmt(delta.max_dz),
                     fmt(delta.max_dk)});
    }
    const std::string path = cfg.out_dir + "/oracle.csv";
    csv.write_file(path);
    manifest.add_output(path);
    manifest.add_metric("max_discrepancy", worst);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "rbdsde: reflected backward doubly stochastic equation laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int threads = 0;
    app.add_option("-c,--config", config_path, "configuration file");
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--seed", seed_override, "seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    app.add_option("--threads", threads, "worker thread count (0 = default)");

    CLI::App* cmd_check =
        app.add_subcommand("check-assumptions", "audit the hypotheses");
    CLI::App* cmd_env =
        app.add_subcommand("envelope", "tabulate Lipschitz envelopes");
    CLI::App* cmd_solve =
        app.add_subcommand("solve", "solve a Lipschitz problem");
    bool dump = false;
    cmd_solve->add_flag("--dump", dump, "write the binary field dump");
    CLI::App* cmd_iter =
        app.add_subcommand("iterate", "run the monotone iteration");
    bool maximal = false;
    cmd_iter->add_flag("--maximal", maximal,
                       "mirror transform (obstacle-free problems)");
    CLI::App* cmd_cmp =
        app.add_subcommand("compare", "run the comparison case bank");
    CLI::App* cmd_lemma =
        app.add_subcommand("lemma", "run the positivity scenarios");
    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "check the solver against the oracles");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty()
                            ? parse_config_text("", "<defaults>")
                            : parse_config_file(config_path);
        if (seed_set) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (dump) cfg.dump_field = true;
        par::set_threads(threads);
        std::filesystem::create_directories(cfg.out_dir);

        std::string command;
        if (cmd_check->parsed()) command = "check-assumptions";
        else if (cmd_env->parsed()) command = "envelope";
        else if (cmd_solve->parsed()) command = "solve";
        else if (cmd_iter->parsed()) command = "iterate";
        else if (cmd_cmp->parsed()) command = "compare";
        else if (cmd_lemma->parsed()) command = "lemma";
        else command = "oracle";

        RunManifest manifest(command, cfg.seed, cfg.raw_text);
        int rc = 0;
        if (cmd_check->parsed()) rc = run_check_assumptions(cfg, manifest);
        else if (cmd_env->parsed()) rc = run_envelope(cfg, manifest);
        else if (cmd_solve->parsed()) rc = run_solve(cfg, manifest);
        else if (cmd_iter->parsed()) rc = run_iterate(cfg, maximal, manifest);
        else if (cmd_cmp->parsed()) rc = run_compare(cfg, manifest);
        else if (cmd_lemma->parsed()) rc = run_lemma(cfg, manifest);
        else rc = run_oracle(cfg, manifest);
        manifest.write(cfg.out_dir);
        return rc;
    } catch (const rbdsde::HypothesisError& e) {
        std::cerr << "hypothesis refusal: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
