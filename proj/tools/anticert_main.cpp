#include <clocale>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "anticert/antimeas.hpp"
#include "anticert/exclusion.hpp"
#include "anticert/families.hpp"
#include "anticert/json_io.hpp"
#include "anticert/quantum_model.hpp"

namespace {

using namespace anticert;

// Exit codes are a stable contract: 0 success/pass, 2 input error,
// 3 verification failed, 4 solver non-convergence.
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitVerifyFail = 3;
constexpr int kExitNoConvergence = 4;

struct RunConfig {
    std::uint64_t seed = 0;
    double tol_gap = 1e-7;
    std::size_t restarts = 24;
    std::size_t max_iters = 100000;
    std::string format = "json";
    std::string out = "-";
};

struct FamilyArgs {
    std::size_t dim = 0;
    std::string state_path;
    bool max_entangled = false;
    double lambda = 0.5;
    double x_angle = 0.0;
    double phase = 0.0;
    std::string omega = "bound";
    std::string epsilon = "bound";
};

struct VerifyArgs {
    std::string state_path;
    double theorem_tol = 1e-6;
    double param_scale = 1.0;
};

struct SweepArgs {
    std::size_t dim = 0;
    std::string grid;
    double lambda = 0.5;
};

struct SolveArgs {
    std::string kind;
    std::string instance_path;
};

[[noreturn]] void input_error(const std::string& message) { throw ParseError(message); }

void write_output(const RunConfig& cfg, const std::string& text) {
    if (cfg.out == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) input_error("cannot open for writing: " + cfg.out);
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) input_error("write failed: " + cfg.out);
}

void require_json_format(const RunConfig& cfg, const char* command) {
    if (cfg.format != "json")
        input_error(std::string(command) + " emits json only; csv applies to sweep");
}

SolverOptions solver_options(const RunConfig& cfg) {
    return {cfg.tol_gap, cfg.max_iters, cfg.seed};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<PureState> computational_basis(std::size_t d) {
    std::vector<PureState> basis;
    basis.reserve(d);
    for (std::size_t k = 0; k < d; ++k) basis.push_back(PureState::computational(d, k));
    return basis;
}

std::vector<cxd> equal_coeffs(std::size_t d) {
    return std::vector<cxd>(d, cxd(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
}

double strict_stod(const std::string& token, const char* what) {
    std::size_t idx = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &idx);
    } catch (const std::exception&) {
        idx = 0;
    }
    if (idx != token.size() || token.empty())
        input_error(std::string(what) + ": expected a number, got '" + token + "'");
    return v;
}

// nullopt means the caller should substitute the family's admissible bound.
std::optional<double> value_or_bound(const std::string& text, const char* flag) {
    if (text == "bound") return std::nullopt;
    return strict_stod(text, flag);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string token = text.substr(pos, comma - pos);
        const auto first = token.find_first_not_of(" \t");
        if (first != std::string::npos) {
            const auto last = token.find_last_not_of(" \t");
            values.push_back(strict_stod(token.substr(first, last - first + 1), "--grid"));
        }
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    return values;
}

const json& field(const json& doc, const char* key) {
    if (!doc.is_object()) input_error(std::string("expected an object holding '") + key + "'");
    auto it = doc.find(key);
    if (it == doc.end()) input_error(std::string("missing field '") + key + "'");
    return *it;
}

int run_family(const CLI::App* cmd, const FamilyArgs& args, const RunConfig& cfg) {
    require_json_format(cfg, "family");
    const FamilyChoice choice = [&]() -> FamilyChoice {
        if (!args.state_path.empty()) {
            const BipartiteState state = bipartite_from_json(load_json(args.state_path));
            if (args.dim != 0 && state.dim() != args.dim)
                input_error("--dim does not match the state file");
            if (!state.is_entangled()) input_error("entangled state required");
            return family_for_state(state);
        }
        if (args.dim == 0) input_error("either --dim or --state is required");
        if (args.dim % 2 != 0) input_error("even dimension required");
        if (args.dim == 2) {
            const double bound = theorem1_x_bound(args.lambda);
            const double x = cmd->count("--x-angle") != 0u
                                 ? args.x_angle
                                 : std::atan(std::sqrt(2.0 * bound));
            return {build_family_R({args.lambda, x, args.phase, computational_basis(2)}),
                    FamilyKind::R, x, bound};
        }
        if (!args.max_entangled)
            input_error("coefficient source required: pass --max-entangled or --state");
        const std::vector<cxd> coeffs = equal_coeffs(args.dim);
        if (args.dim % 4 == 0) {
            if (cmd->count("--epsilon") != 0u)
                input_error("--epsilon applies to d = 2 mod 4; use --omega");
            const double bound = theorem2_omega_bound(coeffs);
            const auto given = value_or_bound(args.omega, "--omega");
            const double omega = given ? *given : std::sqrt(bound);
            return {build_family_S({args.dim, omega, coeffs, computational_basis(args.dim)}),
                    FamilyKind::S, omega, bound};
        }
        if (cmd->count("--omega") != 0u)
            input_error("--omega applies to d = 0 mod 4; use --epsilon");
        const double bound = theorem3_epsilon_bound(coeffs);
        const auto given = value_or_bound(args.epsilon, "--epsilon");
        const double epsilon = given ? *given : std::sqrt(bound);
        return {build_family_Q({args.dim, epsilon, coeffs, computational_basis(args.dim)}),
                FamilyKind::Q, epsilon, bound};
    }();
    write_output(cfg, serialize(to_json(choice)));
    return kExitOk;
}

int run_verify(const VerifyArgs& args, const RunConfig& cfg) {
    require_json_format(cfg, "verify");
    const BipartiteState state = bipartite_from_json(load_json(args.state_path));
    if (!state.is_entangled()) input_error("entangled state required");
    VerifyOptions options;
    options.theorem_tol = args.theorem_tol;
    options.seed = cfg.seed;
    options.restarts = cfg.restarts;
    options.max_iterations = cfg.max_iters;
    options.gap_tol = cfg.tol_gap;
    options.param_scale = args.param_scale;
    const VerificationReport report = verify_theorem(state, options);
    write_output(cfg, serialize(to_json(report)));
    return report.passed ? kExitOk : kExitVerifyFail;
}

int run_sweep(const SweepArgs& args, const RunConfig& cfg) {
    if (args.dim == 0) input_error("--dim is required");
    if (args.dim % 2 != 0) input_error("even dimension required");
    const std::vector<double> grid = parse_grid(args.grid);
    if (grid.empty()) input_error("empty grid");

    std::vector<cxd> coeffs;
    if (args.dim == 2) {
        if (args.lambda <= 0.0 || args.lambda >= 1.0)
            input_error("--lambda must be strictly inside (0, 1)");
        coeffs = {cxd(std::sqrt(args.lambda), 0.0), cxd(std::sqrt(1.0 - args.lambda), 0.0)};
    } else {
        coeffs = equal_coeffs(args.dim);
    }
    const std::vector<PureState> basis = computational_basis(args.dim);
    const BipartiteState probe{coeffs, basis, basis};

    struct Row {
        double parameter;
        double ame;
        std::vector<double> as;
        bool lemma2;
        double ams_best;
    };
    std::vector<Row> rows;
    rows.reserve(grid.size());
    for (double v : grid) {
        const MeasurementEnsemble ensemble = [&]() -> MeasurementEnsemble {
            if (args.dim == 2) return build_family_R({args.lambda, v, 0.0, basis});
            if (args.dim % 4 == 0) return build_family_S({args.dim, v, coeffs, basis});
            return build_family_Q({args.dim, v, coeffs, basis});
        }();
        const AmeResult ame = ame_for_probe(ensemble, probe, solver_options(cfg));
        Row row;
        row.parameter = v;
        row.ame = ame.ame;
        for (const auto& outcome : ame.per_outcome) row.as.push_back(outcome.as);
        row.lemma2 = lemma2_feasible(ensemble).feasible;
        row.ams_best = ams_optimize(ensemble, cfg.restarts, cfg.seed).best;
        rows.push_back(std::move(row));
    }

    if (cfg.format == "csv") {
        std::string text = "parameter,ame";
        for (std::size_t a = 0; a < args.dim; ++a) text += ",as_" + std::to_string(a);
        text += ",lemma2_feasible,ams_best\n";
        for (const Row& row : rows) {
            text += format_double(row.parameter);
            text += ',';
            text += format_double(row.ame);
            for (double as : row.as) {
                text += ',';
                text += format_double(as);
            }
            text += row.lemma2 ? ",1," : ",0,";
            text += format_double(row.ams_best);
            text += '\n';
        }
        write_output(cfg, text);
    } else {
        json doc = json::array();
        for (const Row& row : rows)
            doc.push_back(json{{"parameter", row.parameter},
                               {"ame", row.ame},
                               {"per_outcome_as", row.as},
                               {"lemma2_feasible", row.lemma2},
                               {"ams_best", row.ams_best}});
        write_output(cfg, serialize(doc));
    }
    return kExitOk;
}

int run_solve(const SolveArgs& args, const RunConfig& cfg) {
    require_json_format(cfg, "solve");
    const json doc = load_json(args.instance_path);
    if (args.kind == "as") {
        const ExclusionInstance instance = instance_from_json(doc);
        write_output(cfg, serialize(to_json(as_value(instance, solver_options(cfg)))));
        return kExitOk;
    }
    const MeasurementEnsemble ensemble = ensemble_from_json(field(doc, "ensemble"));
    if (args.kind == "ams") {
        write_output(cfg, serialize(to_json(ams_optimize(ensemble, cfg.restarts, cfg.seed))));
        return kExitOk;
    }
    const BipartiteState probe = bipartite_from_json(field(doc, "probe"));
    write_output(cfg, serialize(to_json(ame_for_probe(ensemble, probe, solver_options(cfg)))));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");  // '.' decimal separator in every locale

    CLI::App app{
        "Builds three-measurement families on d (x) d entangled probes and certifies that "
        "they are perfectly antidistinguishable with the entangled probe but not with any "
        "single-system probe."};
    app.require_subcommand(1);

    RunConfig cfg;
    FamilyArgs family_args;
    VerifyArgs verify_args;
    SweepArgs sweep_args;
    SolveArgs solve_args;

    const auto add_common = [&cfg](CLI::App* cmd) {
        cmd->add_option("--seed", cfg.seed, "deterministic RNG seed (default 0)");
        cmd->add_option("--tol-gap", cfg.tol_gap, "certified duality-gap tolerance");
        cmd->add_option("--restarts", cfg.restarts, "probe-search restarts");
        cmd->add_option("--max-iters", cfg.max_iters, "solver iteration cap");
        cmd->add_option("--out", cfg.out, "output path, '-' for stdout");
        cmd->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* family_cmd =
        app.add_subcommand("family", "construct a measurement family and emit it as JSON");
    family_cmd->add_option("--dim", family_args.dim, "probe dimension d (even)");
    family_cmd->add_option("--state", family_args.state_path, "bipartite probe state file")
        ->check(CLI::ExistingFile);
    family_cmd->add_flag("--max-entangled", family_args.max_entangled,
                         "use equal Schmidt coefficients 1/sqrt(d)");
    family_cmd->add_option("--lambda", family_args.lambda, "d=2 Schmidt weight, in (0,1)");
    family_cmd->add_option("--x-angle", family_args.x_angle,
                           "d=2 rotation angle in radians; default atan(sqrt(2*bound))");
    family_cmd->add_option("--phase", family_args.phase, "d=2 relative phase (default 0)");
    family_cmd->add_option("--omega", family_args.omega,
                           "d = 0 mod 4 pairing weight: a number or 'bound'");
    family_cmd->add_option("--epsilon", family_args.epsilon,
                           "d = 2 mod 4 pairing weight: a number or 'bound'");
    add_common(family_cmd);

    CLI::App* verify_cmd =
        app.add_subcommand("verify", "certify one probe state end to end and emit the report");
    verify_cmd->add_option("--state", verify_args.state_path, "bipartite probe state file")
        ->required()
        ->check(CLI::ExistingFile);
    verify_cmd->add_option("--theorem-tol", verify_args.theorem_tol, "tolerance on ame = 1");
    verify_cmd->add_option("--param-scale", verify_args.param_scale,
                           "scales the squared family parameter; values != 1 leave the "
                           "certified region");
    add_common(verify_cmd);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "evaluate the family over a parameter grid (CSV by default)");
    sweep_cmd->add_option("--dim", sweep_args.dim, "probe dimension d (even)")->required();
    sweep_cmd->add_option("--grid", sweep_args.grid, "comma-separated parameter values")
        ->required();
    sweep_cmd->add_option("--lambda", sweep_args.lambda, "d=2 Schmidt weight, in (0,1)");
    add_common(sweep_cmd);

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "solve a standalone as/ams/ame instance file");
    solve_cmd->add_option("--kind", solve_args.kind, "as | ams | ame")
        ->required()
        ->check(CLI::IsMember({"as", "ams", "ame"}));
    solve_cmd->add_option("--instance", solve_args.instance_path, "instance file")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(solve_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (family_cmd->parsed()) return run_family(family_cmd, family_args, cfg);
        if (verify_cmd->parsed()) return run_verify(verify_args, cfg);
        if (sweep_cmd->parsed()) {
            if (sweep_cmd->count("--format") == 0u) cfg.format = "csv";
            return run_sweep(sweep_args, cfg);
        }
        if (solve_cmd->parsed()) return run_solve(solve_args, cfg);
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoConvergence;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const CapabilityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return kExitInput;
}
