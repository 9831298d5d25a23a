#include "anticert/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace anticert {

namespace {

[[noreturn]] void fail(const std::string& message) { throw ParseError(message); }

// %.17g preserves every double exactly across a parse/emit round trip and is
// a pure function of the value, so re-serialization is byte-stable.
void append_double(std::string& out, double v) {
    if (!std::isfinite(v)) fail("non-finite number cannot be serialized");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void append_value(std::string& out, const json& v) {
    switch (v.type()) {
        case json::value_t::null:
            out += "null";
            break;
        case json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(v.get<long long>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(v.get<unsigned long long>());
            break;
        case json::value_t::number_float:
            append_double(out, v.get<double>());
            break;
        case json::value_t::string:
            out += json(v.get<std::string>()).dump();
            break;
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ',';
                first = false;
                append_value(out, item);
            }
            out += ']';
            break;
        }
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& item : v.items()) {  // key-sorted iteration
                if (!first) out += ',';
                first = false;
                out += json(item.key()).dump();
                out += ':';
                append_value(out, item.value());
            }
            out += '}';
            break;
        }
        default:
            fail("unsupported JSON value type");
    }
}

const json& member(const json& j, const char* key) {
    if (!j.is_object()) fail(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

double to_double(const json& v, const char* what) {
    if (!v.is_number()) fail(std::string(what) + " must be a number");
    return v.get<double>();
}

double number_field(const json& j, const char* key) { return to_double(member(j, key), key); }

std::size_t index_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        fail(std::string(key) + " must be a non-negative integer");
    return v.get<std::size_t>();
}

bool bool_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_boolean()) fail(std::string(key) + " must be a boolean");
    return v.get<bool>();
}

std::string string_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_string()) fail(std::string(key) + " must be a string");
    return v.get<std::string>();
}

const json& array_field(const json& j, const char* key) {
    const json& v = member(j, key);
    if (!v.is_array()) fail(std::string(key) + " must be an array");
    return v;
}

std::vector<cxd> complex_vector(const json& j, const char* what) {
    if (!j.is_array()) fail(std::string(what) + " must be an array of [re, im] pairs");
    std::vector<cxd> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(complex_from_json(item));
    return out;
}

std::vector<double> double_vector(const json& j, const char* what) {
    if (!j.is_array()) fail(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(to_double(item, what));
    return out;
}

json states_to_json(const std::vector<PureState>& states) {
    json out = json::array();
    for (const auto& s : states) out.push_back(to_json(s));
    return out;
}

std::vector<PureState> states_from_json(const json& j, const char* what, const Tolerances& tol) {
    if (!j.is_array()) fail(std::string(what) + " must be an array of states");
    std::vector<PureState> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(pure_state_from_json(item, tol));
    return out;
}

}  // namespace

json to_json(cxd value) { return json::array({value.real(), value.imag()}); }

json to_json(const ComplexMatrix& m) {
    json entries = json::array();
    for (const auto& e : m.entries()) entries.push_back(to_json(e));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

json to_json(const PureState& s) {
    json out = json::array();
    for (const auto& a : s.amplitudes()) out.push_back(to_json(a));
    return out;
}

json to_json(const DensityOperator& rho) { return to_json(rho.matrix()); }

json to_json(const ProjectiveMeasurement& m) {
    json vectors = json::array();
    for (std::size_t a = 0; a < m.outcomes(); ++a) vectors.push_back(to_json(m.effect_vector(a)));
    return json{{"dim", m.dim()}, {"vectors", std::move(vectors)}};
}

json to_json(const MeasurementEnsemble& e) {
    json measurements = json::array();
    for (const auto& m : e.measurements()) measurements.push_back(to_json(m));
    return json{{"dim", e.dim()},
                {"measurements", std::move(measurements)},
                {"priors", e.priors()}};
}

json to_json(const BipartiteState& s) {
    json coeffs = json::array();
    for (const auto& c : s.schmidt_coeffs()) coeffs.push_back(to_json(c));
    return json{{"dim", s.dim()},
                {"schmidt_coeffs", std::move(coeffs)},
                {"basis_a", states_to_json(s.basis_a())},
                {"basis_b", states_to_json(s.basis_b())}};
}

json to_json(const ExclusionInstance& instance) {
    json states = json::array();
    for (const auto& rho : instance.states) states.push_back(to_json(rho));
    return json{{"states", std::move(states)}, {"weights", instance.weights}};
}

json to_json(const ExclusionResult& result) {
    json povm = json::array();
    for (const auto& effect : result.povm) povm.push_back(to_json(effect));
    return json{{"as_value", result.as_value},
                {"primal_value", result.primal_value},
                {"dual_value", result.dual_value},
                {"duality_gap", result.duality_gap},
                {"iterations", result.iterations},
                {"povm", std::move(povm)},
                {"dual_certificate", to_json(result.dual_certificate)},
                {"null_outcome_repaired", result.null_outcome_repaired}};
}

json to_json(const FamilyChoice& choice) {
    return json{{"kind", family_kind_name(choice.kind)},
                {"parameter", choice.parameter},
                {"bound", choice.bound},
                {"ensemble", to_json(choice.ensemble)}};
}

json to_json(const VerificationReport& report) {
    json per_outcome = json::array();
    for (const auto& row : report.per_outcome_as)
        per_outcome.push_back(json{{"outcome", row.outcome},
                                   {"as", row.as},
                                   {"weight_sum", row.weight_sum}});
    return json{{"theorem", theorem_tag_name(report.theorem)},
                {"parameter_used", report.parameter_used},
                {"bound", report.bound},
                {"ame", report.ame},
                {"per_outcome_as", std::move(per_outcome)},
                {"ams_structural", report.ams_structural},
                {"ams_numeric_best", report.ams_numeric_best},
                {"passed", report.passed}};
}

json to_json(const AmsOptimum& best) {
    return json{{"best", best.best}, {"probe", to_json(best.probe.state)}};
}

json to_json(const AmeResult& result) {
    json per_outcome = json::array();
    for (const auto& row : result.per_outcome)
        per_outcome.push_back(json{{"outcome", row.outcome},
                                   {"as", row.as},
                                   {"weight_sum", row.weight_sum},
                                   {"exclusion", to_json(row.exclusion)}});
    return json{{"ame", result.ame}, {"per_outcome", std::move(per_outcome)}};
}

cxd complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        fail("complex scalar must be a [re, im] pair");
    return {to_double(j[0], "re"), to_double(j[1], "im")};
}

ComplexMatrix matrix_from_json(const json& j) {
    const std::size_t rows = index_field(j, "rows");
    const std::size_t cols = index_field(j, "cols");
    std::vector<cxd> entries = complex_vector(array_field(j, "entries"), "entries");
    if (entries.size() != rows * cols) fail("entries length must equal rows * cols");
    return {rows, cols, std::move(entries)};
}

PureState pure_state_from_json(const json& j, const Tolerances& tol) {
    return {complex_vector(j, "state"), tol};
}

DensityOperator density_from_json(const json& j, const Tolerances& tol) {
    return {matrix_from_json(j), tol};
}

ProjectiveMeasurement measurement_from_json(const json& j, const Tolerances& tol) {
    const std::size_t dim = index_field(j, "dim");
    return {dim, states_from_json(array_field(j, "vectors"), "vectors", tol), tol};
}

MeasurementEnsemble ensemble_from_json(const json& j, const Tolerances& tol) {
    const std::size_t dim = index_field(j, "dim");
    std::vector<ProjectiveMeasurement> measurements;
    for (const auto& item : array_field(j, "measurements"))
        measurements.push_back(measurement_from_json(item, tol));
    std::vector<double> priors = double_vector(array_field(j, "priors"), "priors");
    MeasurementEnsemble out{std::move(measurements), std::move(priors), tol};
    if (out.dim() != dim) fail("ensemble dim does not match its measurements");
    return out;
}

BipartiteState bipartite_from_json(const json& j, const Tolerances& tol) {
    const std::size_t dim = index_field(j, "dim");
    std::vector<cxd> coeffs = complex_vector(array_field(j, "schmidt_coeffs"), "schmidt_coeffs");
    if (coeffs.size() != dim) fail("schmidt_coeffs length must equal dim");
    return {std::move(coeffs), states_from_json(array_field(j, "basis_a"), "basis_a", tol),
            states_from_json(array_field(j, "basis_b"), "basis_b", tol), tol};
}

ExclusionInstance instance_from_json(const json& j, const Tolerances& tol) {
    ExclusionInstance instance;
    for (const auto& item : array_field(j, "states"))
        instance.states.push_back(density_from_json(item, tol));
    instance.weights = double_vector(array_field(j, "weights"), "weights");
    if (instance.states.empty()) fail("states must be non-empty");
    if (instance.states.size() != instance.weights.size())
        fail("states and weights must have equal length");
    return instance;
}

ExclusionResult exclusion_result_from_json(const json& j) {
    ExclusionResult result;
    result.as_value = number_field(j, "as_value");
    result.primal_value = number_field(j, "primal_value");
    result.dual_value = number_field(j, "dual_value");
    result.duality_gap = number_field(j, "duality_gap");
    result.iterations = index_field(j, "iterations");
    for (const auto& item : array_field(j, "povm")) result.povm.push_back(matrix_from_json(item));
    result.dual_certificate = matrix_from_json(member(j, "dual_certificate"));
    result.null_outcome_repaired = bool_field(j, "null_outcome_repaired");
    return result;
}

FamilyChoice family_choice_from_json(const json& j, const Tolerances& tol) {
    const std::string kind = string_field(j, "kind");
    FamilyKind parsed;
    if (kind == "R")
        parsed = FamilyKind::R;
    else if (kind == "S")
        parsed = FamilyKind::S;
    else if (kind == "Q")
        parsed = FamilyKind::Q;
    else
        fail("kind must be one of R, S, Q");
    return {ensemble_from_json(member(j, "ensemble"), tol), parsed, number_field(j, "parameter"),
            number_field(j, "bound")};
}

VerificationReport report_from_json(const json& j) {
    VerificationReport report;
    const std::string tag = string_field(j, "theorem");
    if (tag == "T1")
        report.theorem = TheoremTag::T1;
    else if (tag == "T2")
        report.theorem = TheoremTag::T2;
    else if (tag == "T3")
        report.theorem = TheoremTag::T3;
    else
        fail("theorem must be one of T1, T2, T3");
    report.parameter_used = number_field(j, "parameter_used");
    report.bound = number_field(j, "bound");
    report.ame = number_field(j, "ame");
    for (const auto& item : array_field(j, "per_outcome_as"))
        report.per_outcome_as.push_back({index_field(item, "outcome"), number_field(item, "as"),
                                         number_field(item, "weight_sum")});
    report.ams_structural = bool_field(j, "ams_structural");
    report.ams_numeric_best = number_field(j, "ams_numeric_best");
    report.passed = bool_field(j, "passed");
    return report;
}

AmsOptimum ams_optimum_from_json(const json& j, const Tolerances& tol) {
    return {number_field(j, "best"),
            ProbeState{pure_state_from_json(member(j, "probe"), tol)}};
}

AmeResult ame_result_from_json(const json& j) {
    AmeResult result;
    result.ame = number_field(j, "ame");
    for (const auto& item : array_field(j, "per_outcome")) {
        AmeOutcome row;
        row.outcome = index_field(item, "outcome");
        row.as = number_field(item, "as");
        row.weight_sum = number_field(item, "weight_sum");
        row.exclusion = exclusion_result_from_json(member(item, "exclusion"));
        result.per_outcome.push_back(std::move(row));
    }
    return result;
}

std::string serialize(const json& j) {
    std::string out;
    append_value(out, j);
    out += '\n';
    return out;
}

void save_json(const std::filesystem::path& path, const json& j) {
    const std::string text = serialize(j);
    std::ofstream file(path, std::ios::binary);
    if (!file) fail("cannot open for writing: " + path.string());
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) fail("write failed: " + path.string());
}

json load_json(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) fail("cannot open for reading: " + path.string());
    try {
        return json::parse(file);
    } catch (const json::parse_error& e) {
        fail(path.string() + ": " + e.what());
    }
}

}  // namespace anticert
