#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "anticert/antimeas.hpp"
#include "anticert/exclusion.hpp"
#include "anticert/families.hpp"
#include "anticert/quantum_model.hpp"

namespace anticert {

using json = nlohmann::json;

// Raised for malformed files or schema violations during parsing.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/*
 * Shared value encoding: complex scalars as [re, im] pairs, pure states as
 * amplitude arrays, matrices as {rows, cols, entries} with row-major entries.
 * serialize() renders with sorted object keys and decimal numbers at 17
 * significant digits, so equal values always produce identical bytes.
 */

json to_json(cxd value);
json to_json(const ComplexMatrix& m);
json to_json(const PureState& s);
json to_json(const DensityOperator& rho);
json to_json(const ProjectiveMeasurement& m);
json to_json(const MeasurementEnsemble& e);
json to_json(const BipartiteState& s);
json to_json(const ExclusionInstance& instance);
json to_json(const ExclusionResult& result);
json to_json(const FamilyChoice& choice);
json to_json(const VerificationReport& report);
json to_json(const AmsOptimum& best);
json to_json(const AmeResult& result);

cxd complex_from_json(const json& j);
ComplexMatrix matrix_from_json(const json& j);
PureState pure_state_from_json(const json& j, const Tolerances& tol = {});
DensityOperator density_from_json(const json& j, const Tolerances& tol = {});
ProjectiveMeasurement measurement_from_json(const json& j, const Tolerances& tol = {});
MeasurementEnsemble ensemble_from_json(const json& j, const Tolerances& tol = {});
BipartiteState bipartite_from_json(const json& j, const Tolerances& tol = {});
ExclusionInstance instance_from_json(const json& j, const Tolerances& tol = {});
ExclusionResult exclusion_result_from_json(const json& j);
FamilyChoice family_choice_from_json(const json& j, const Tolerances& tol = {});
VerificationReport report_from_json(const json& j);
AmsOptimum ams_optimum_from_json(const json& j, const Tolerances& tol = {});
AmeResult ame_result_from_json(const json& j);

std::string serialize(const json& j);

void save_json(const std::filesystem::path& path, const json& j);
json load_json(const std::filesystem::path& path);

}  // namespace anticert
