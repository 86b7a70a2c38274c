#include "rbdsde/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rbdsde {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Parser {
    std::string filename;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(filename + ":" + std::to_string(line) + ": " + msg);
    }

    double number(const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) fail("trailing characters in number '" + v + "'");
            return x;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
        }
    }

    std::size_t count(const std::string& v) const {
        const double x = number(v);
        if (x < 0 || x != std::floor(x)) fail("expected a nonnegative integer");
        return static_cast<std::size_t>(x);
    }

    std::uint64_t u64(const std::string& v) const {
        try {
            std::size_t pos = 0;
            const unsigned long long x = std::stoull(v, &pos);
            if (pos != v.size()) fail("trailing characters in integer '" + v + "'");
            return x;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            fail("expected an integer, got '" + v + "'");
        }
    }

    bool boolean(const std::string& v) const {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail("expected a boolean, got '" + v + "'");
    }

    std::vector<double> number_list(const std::string& v) const {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(number(item));
        }
        if (out.empty()) fail("expected a comma-separated list of numbers");
        return out;
    }
};

} // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& filename) {
    RunConfig cfg;
    cfg.raw_text = text;
    Parser p{filename, 0};
    std::string section;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') p.fail("unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "problem" && section != "grid" &&
                section != "noise" && section != "solver" &&
                section != "scheme" && section != "envelope" &&
                section != "compare" && section != "audit" &&
                section != "output")
                p.fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) p.fail("expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) p.fail("empty key");
        if (val.empty()) p.fail("empty value for key '" + key + "'");
        if (section.empty()) p.fail("key '" + key + "' outside any section");

        if (section == "problem") {
            if (key == "name") cfg.problem = val;
            else if (key == "kappa") cfg.overrides.kappa = p.number(val);
            else if (key == "phi") cfg.overrides.phi = p.number(val);
            else if (key == "drift_level")
                cfg.overrides.drift_level = p.number(val);
            else if (key == "terminal_const")
                cfg.overrides.terminal_const = p.number(val);
            else if (key == "obstacle_level")
                cfg.overrides.obstacle_level = p.number(val);
            else p.fail("unknown key '" + key + "' in [problem]");
        } else if (section == "grid") {
            if (key == "T") {
                cfg.horizon = p.number(val);
                if (!(cfg.horizon > 0)) p.fail("T must be > 0");
            } else if (key == "N") {
                cfg.steps = p.count(val);
                if (cfg.steps < 1) p.fail("N must be >= 1");
            } else p.fail("unknown key '" + key + "' in [grid]");
        } else if (section == "noise") {
            if (key == "mode") {
                if (val == "tree") cfg.noise_mode = NoiseMode::rademacher_tree;
                else if (val == "gaussian") cfg.noise_mode = NoiseMode::gaussian;
                else p.fail("mode must be 'tree' or 'gaussian'");
            } else if (key == "P") cfg.paths = p.count(val);
            else if (key == "seed") cfg.seed = p.u64(val);
            else if (key == "d") cfg.d = p.count(val);
            else if (key == "l") cfg.l = p.count(val);
            else p.fail("unknown key '" + key + "' in [noise]");
        } else if (section == "solver") {
            if (key == "engine") {
                if (val == "tree") cfg.solver.engine = Engine::tree;
                else if (val == "regression")
                    cfg.solver.engine = Engine::regression;
                else p.fail("engine must be 'tree' or 'regression'");
            } else if (key == "y_update") {
                if (val == "implicit") cfg.solver.y_update = YUpdate::implicit_y;
                else if (val == "explicit")
                    cfg.solver.y_update = YUpdate::explicit_y;
                else p.fail("y_update must be 'implicit' or 'explicit'");
            } else if (key == "basis_degree")
                cfg.solver.basis.degree = static_cast<int>(p.count(val));
            else if (key == "ridge") cfg.solver.basis.ridge = p.number(val);
            else if (key == "indicator_basis")
                cfg.solver.basis.indicator = p.boolean(val);
            else if (key == "per_increment_b")
                cfg.solver.basis.per_increment_b = p.boolean(val);
            else if (key == "picard_tol") {
                cfg.solver.picard_tol = p.number(val);
                if (!(cfg.solver.picard_tol > 0))
                    p.fail("picard_tol must be > 0");
            } else if (key == "picard_max")
                cfg.solver.picard_max = static_cast<int>(p.count(val));
            else p.fail("unknown key '" + key + "' in [solver]");
        } else if (section == "scheme") {
            if (key == "tol") {
                cfg.scheme.tol = p.number(val);
                cfg.scheme_tol_set = true;
                if (!(cfg.scheme.tol > 0)) p.fail("tol must be > 0");
            } else if (key == "max_n")
                cfg.scheme.max_n = static_cast<int>(p.count(val));
            else if (key == "monotone_guard")
                cfg.scheme.monotone_guard = p.number(val);
            else if (key == "h") {
                if (val != "problem" && val != "zero" && val != "neg-y" &&
                    val != "neg-z" && val != "neg-yz")
                    p.fail("h must be problem|zero|neg-y|neg-z|neg-yz");
                cfg.h_choice = val;
            } else if (key == "h_lipschitz") {
                cfg.h_lipschitz = p.number(val);
                if (!(cfg.h_lipschitz > 0)) p.fail("h_lipschitz must be > 0");
            } else p.fail("unknown key '" + key + "' in [scheme]");
        } else if (section == "envelope") {
            if (key == "n_list") cfg.envelope_levels = p.number_list(val);
            else if (key == "y_min") cfg.envelope_y_min = p.number(val);
            else if (key == "y_max") cfg.envelope_y_max = p.number(val);
            else if (key == "points") cfg.envelope_points = p.count(val);
            else if (key == "t") cfg.envelope_t = p.number(val);
            else p.fail("unknown key '" + key + "' in [envelope]");
        } else if (section == "compare") {
            if (key == "tol") cfg.compare_tol = p.number(val);
            else if (key == "case") cfg.compare_case = val;
            else p.fail("unknown key '" + key + "' in [compare]");
        } else if (section == "audit") {
            if (key == "budget") {
                cfg.audit_budget = p.count(val);
                if (cfg.audit_budget < 1) p.fail("budget must be >= 1");
            } else if (key == "t_max") {
                cfg.audit_box.t_max = p.number(val);
                cfg.audit_t_max_set = true;
            } else if (key == "y_half") cfg.audit_box.y_half = p.number(val);
            else if (key == "z_half") cfg.audit_box.z_half = p.number(val);
            else p.fail("unknown key '" + key + "' in [audit]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else if (key == "dump") cfg.dump_field = p.boolean(val);
            else p.fail("unknown key '" + key + "' in [output]");
        }
    }
    cfg.resolve();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

void RunConfig::resolve() {
    if (!scheme_tol_set)
        scheme.tol = noise_mode == NoiseMode::rademacher_tree ? 1e-10 : 1e-4;
    if (!audit_t_max_set) audit_box.t_max = horizon;
    if (out_dir.empty()) {
        const char* env = std::getenv("RBDSDE_OUT");
        out_dir = env != nullptr && *env ? env : ".";
    }
}

ProblemSpec RunConfig::make_problem() const {
    ProblemSpec spec = builtin_problem(problem, overrides);
    if (h_choice != "problem") {
        MinorantSpec h;
        h.h_lipschitz = h_lipschitz;
        const double L = h_lipschitz;
        if (h_choice == "zero")
            h.h = [](double, std::span<const double>) { return 0.0; };
        else if (h_choice == "neg-y")
            h.h = [L](double dy, std::span<const double>) {
                return -L * std::abs(dy);
            };
        else if (h_choice == "neg-z")
            h.h = [L](double, std::span<const double> dz) {
                double n2 = 0.0;
                for (double v : dz) n2 += v * v;
                return -L * std::sqrt(n2);
            };
        else
            h.h = [L](double dy, std::span<const double> dz) {
                double n2 = 0.0;
                for (double v : dz) n2 += v * v;
                return -L * (std::abs(dy) + std::sqrt(n2));
            };
        spec.minorant = h;
    }
    return spec;
}

} // namespace rbdsde
