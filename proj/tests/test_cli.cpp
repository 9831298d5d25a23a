#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "anticert/antimeas.hpp"
#include "anticert/exclusion.hpp"
#include "anticert/families.hpp"
#include "anticert/json_io.hpp"

using namespace anticert;
namespace fs = std::filesystem;

namespace {

const fs::path& fixture_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "anticert_cli_fixtures";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string fixture(const std::string& name) { return (fixture_dir() / name).string(); }

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

std::string read_file(const fs::path& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

CommandResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path capture = fixture_dir() / ("stdout_" + std::to_string(counter++) + ".txt");
    const std::string command =
        std::string(ANTICERT_BIN) + " " + args + " > " + capture.string() + " 2> /dev/null";
    const int status = std::system(command.c_str());
    CommandResult result;
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    result.exit_code = WEXITSTATUS(status);
    result.output = read_file(capture);
    fs::remove(capture);
    return result;
}

std::vector<PureState> computational_basis(std::size_t d) {
    std::vector<PureState> basis;
    for (std::size_t k = 0; k < d; ++k) basis.push_back(PureState::computational(d, k));
    return basis;
}

BipartiteState schmidt_state(const std::vector<cxd>& coeffs) {
    const auto basis = computational_basis(coeffs.size());
    return {coeffs, basis, basis};
}

// Writes every fixture file once; contents are value-deterministic.
void write_fixtures() {
    static bool done = false;
    if (done) return;
    done = true;

    const double s = std::sqrt(0.5);
    save_json(fixture("bell.json"), to_json(schmidt_state({s, s})));
    save_json(fixture("product.json"), to_json(schmidt_state({1.0, 0.0})));
    save_json(fixture("lam03.json"), to_json(schmidt_state({std::sqrt(0.3), std::sqrt(0.7)})));
    save_json(fixture("d4_state.json"),
              to_json(schmidt_state({0.5, 0.5, 0.5, 0.5})));

    const double h = std::sqrt(3.0) / 2.0;
    ExclusionInstance trine;
    trine.states.emplace_back(PureState({1.0, 0.0}));
    trine.states.emplace_back(PureState({cxd(-0.5), cxd(h)}));
    trine.states.emplace_back(PureState({cxd(-0.5), cxd(-h)}));
    trine.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    save_json(fixture("trine_as.json"), to_json(trine));

    const auto e = computational_basis(2);
    const MeasurementEnsemble relabeled{{ProjectiveMeasurement(2, {e[0], e[1]}),
                                         ProjectiveMeasurement(2, {e[1], e[0]})},
                                        {0.5, 0.5}};
    save_json(fixture("relabel_ams.json"), json{{"ensemble", to_json(relabeled)}});

    const double x = std::atan(std::sqrt(2.0 * theorem1_x_bound(0.3)));
    const MeasurementEnsemble family_r = build_family_R({0.3, x, 0.0, e});
    save_json(fixture("famR_ame.json"),
              json{{"ensemble", to_json(family_r)},
                   {"probe", to_json(schmidt_state({std::sqrt(0.3), std::sqrt(0.7)}))}});

    std::ofstream bad(fixture("malformed.json"), std::ios::binary);
    bad << "{\"states\": [1, 2,";
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find(sep, pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(text.substr(pos, next - pos));
        if (next == text.size()) break;
        pos = next + 1;
    }
    return out;
}

std::string reformat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

TEST_CASE("verify on the Bell state passes deterministically") {
    write_fixtures();
    const std::string flags = "verify --state " + fixture("bell.json") + " --restarts 6";
    const CommandResult first = run_cli(flags);
    CHECK(first.exit_code == 0);
    const CommandResult second = run_cli(flags);
    CHECK(second.exit_code == 0);
    CHECK(first.output == second.output);  // byte-identical reports

    const VerificationReport report = report_from_json(json::parse(first.output));
    CHECK(report.theorem == TheoremTag::T1);
    CHECK(report.ame == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(report.ams_structural);
    CHECK(report.passed);
    CHECK(serialize(to_json(report)) == first.output);  // emitted file round-trips
}

TEST_CASE("family subcommand covers its construction contract") {
    write_fixtures();

    const CommandResult bound_run = run_cli("family --dim 4 --max-entangled --omega bound");
    CHECK(bound_run.exit_code == 0);
    const FamilyChoice s_choice = family_choice_from_json(json::parse(bound_run.output));
    CHECK(s_choice.kind == FamilyKind::S);
    CHECK(s_choice.parameter == 0.5);
    CHECK(s_choice.bound == 0.25);
    CHECK(s_choice.ensemble.dim() == 4);
    CHECK(serialize(to_json(s_choice)) == bound_run.output);

    const CommandResult odd_run = run_cli("family --dim 3 --max-entangled");
    CHECK(odd_run.exit_code == 2);

    const CommandResult bell_run = run_cli("family --state " + fixture("bell.json"));
    CHECK(bell_run.exit_code == 0);
    const FamilyChoice r_choice = family_choice_from_json(json::parse(bell_run.output));
    CHECK(r_choice.kind == FamilyKind::R);
    const double tan2 = std::pow(std::tan(r_choice.parameter), 2);
    CHECK(tan2 == doctest::Approx(2.0).epsilon(1e-12));

    const CommandResult q_run = run_cli("family --dim 6 --max-entangled --epsilon 0.3");
    CHECK(q_run.exit_code == 0);
    const FamilyChoice q_choice = family_choice_from_json(json::parse(q_run.output));
    CHECK(q_choice.kind == FamilyKind::Q);
    CHECK(q_choice.parameter == 0.3);

    CHECK(run_cli("family --dim 8").exit_code == 2);            // no coefficient source
    CHECK(run_cli("family --dim 8 --max-entangled --epsilon 0.2").exit_code == 2);
    CHECK(run_cli("family --dim 6 --max-entangled --omega 0.2").exit_code == 2);
    CHECK(run_cli("family --state " + fixture("product.json")).exit_code == 2);
}

TEST_CASE("sweep emits deterministic csv rows over the grid") {
    write_fixtures();
    const std::string flags = "sweep --dim 2 --grid 0.6,0.8,1.0,1.2 --restarts 4";
    const CommandResult first = run_cli(flags);
    CHECK(first.exit_code == 0);
    CHECK(first.output == run_cli(flags).output);

    std::vector<std::string> lines = split(first.output, '\n');
    REQUIRE(lines.size() == 6);  // header + 4 rows + trailing newline
    CHECK(lines[0] == "parameter,ame,as_0,as_1,lemma2_feasible,ams_best");
    CHECK(lines[5].empty());

    const std::vector<double> grid = {0.6, 0.8, 1.0, 1.2};
    for (std::size_t k = 0; k < 4; ++k) {
        const std::vector<std::string> cells = split(lines[k + 1], ',');
        REQUIRE(cells.size() == 6);
        CHECK(std::stod(cells[0]) == grid[k]);
        // numeric cells reparse to the exact emitted text
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (c != 4) CHECK(reformat(std::stod(cells[c])) == cells[c]);
        CHECK(cells[4] == "0");
        const double ame = std::stod(cells[1]);
        if (std::pow(std::tan(grid[k]), 2) > 1.0) CHECK(ame == doctest::Approx(1.0).epsilon(1e-6));
        const double as_sum = std::stod(cells[2]) + std::stod(cells[3]);
        CHECK(as_sum == doctest::Approx(ame).epsilon(1e-9));
    }

    const CommandResult wide = run_cli("sweep --dim 4 --grid 0.3,0.5 --restarts 2");
    CHECK(wide.exit_code == 0);
    const std::vector<std::string> wide_lines = split(wide.output, '\n');
    REQUIRE(wide_lines.size() >= 3);
    CHECK(wide_lines[0] == "parameter,ame,as_0,as_1,as_2,as_3,lemma2_feasible,ams_best");
    for (std::size_t k = 1; k <= 2; ++k) {
        const std::vector<std::string> cells = split(wide_lines[k], ',');
        REQUIRE(cells.size() == 8);
        CHECK(std::stod(cells[1]) == doctest::Approx(1.0).epsilon(1e-6));  // omega <= bound
    }

    const CommandResult as_json = run_cli(
        "sweep --dim 2 --grid 0.9 --restarts 2 --format json");
    CHECK(as_json.exit_code == 0);
    const json parsed = json::parse(as_json.output);
    REQUIRE(parsed.is_array());
    CHECK(parsed.size() == 1);
    CHECK(parsed[0]["per_outcome_as"].size() == 2);
    CHECK(serialize(parsed) == as_json.output);

    CHECK(run_cli("sweep --dim 2 --grid \"\"").exit_code == 2);
    CHECK(run_cli("sweep --dim 5 --grid 0.5").exit_code == 2);
    CHECK(run_cli("sweep --dim 2 --grid 0.5,nope").exit_code == 2);
}

TEST_CASE("solve handles the three instance kinds") {
    write_fixtures();

    const CommandResult as_run =
        run_cli("solve --kind as --instance " + fixture("trine_as.json"));
    CHECK(as_run.exit_code == 0);
    const ExclusionResult as_result = exclusion_result_from_json(json::parse(as_run.output));
    CHECK(as_result.as_value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(as_result.duality_gap <= 1e-7);
    CHECK(serialize(to_json(as_result)) == as_run.output);

    const CommandResult ams_run =
        run_cli("solve --kind ams --instance " + fixture("relabel_ams.json"));
    CHECK(ams_run.exit_code == 0);
    const AmsOptimum ams_result = ams_optimum_from_json(json::parse(ams_run.output));
    CHECK(ams_result.best == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ams_result.probe.state.dim() == 2);  // witness probe travels with the value

    const CommandResult ame_run =
        run_cli("solve --kind ame --instance " + fixture("famR_ame.json"));
    CHECK(ame_run.exit_code == 0);
    const AmeResult ame_result = ame_result_from_json(json::parse(ame_run.output));
    CHECK(ame_result.ame == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(serialize(to_json(ame_result)) == ame_run.output);

    CHECK(run_cli("solve --kind ams --instance " + fixture("trine_as.json")).exit_code == 2);
    CHECK(run_cli("solve --kind nope --instance " + fixture("trine_as.json")).exit_code == 2);
}

TEST_CASE("exit codes follow the documented contract") {
    write_fixtures();

    CHECK(run_cli("verify --state " + fixture("bell.json") + " --restarts 4").exit_code == 0);

    CHECK(run_cli("family --dim 3 --max-entangled").exit_code == 2);
    CHECK(run_cli("verify --state " + fixture("product.json")).exit_code == 2);
    CHECK(run_cli("verify --state " + fixture_dir().string() + "/does_not_exist.json").exit_code ==
          2);
    CHECK(run_cli("solve --kind as --instance " + fixture("malformed.json")).exit_code == 2);
    CHECK(run_cli("verify --state " + fixture("bell.json") + " --format csv").exit_code == 2);

    // scaling the squared parameter far beyond the certified region breaks ame = 1
    const CommandResult fail_run = run_cli("verify --state " + fixture("d4_state.json") +
                                           " --param-scale 10 --restarts 2");
    CHECK(fail_run.exit_code == 3);
    const VerificationReport report = report_from_json(json::parse(fail_run.output));
    CHECK_FALSE(report.passed);
    CHECK(report.ame < 1.0 - 1e-6);

    CHECK(run_cli("solve --kind as --instance " + fixture("trine_as.json") +
                  " --tol-gap 1e-30 --max-iters 20")
              .exit_code == 4);

    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("nonsense").exit_code == 2);
}
