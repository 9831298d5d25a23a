#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anticert/exclusion.hpp"
#include "anticert/families.hpp"
#include "anticert/quantum_model.hpp"

namespace anticert {

/*
 * Antidistinguishability of a measurement ensemble {M_{a|x}} with priors p_x.
 *
 * Single-system probe rho:
 *
 *   ams = 1 - min_rho sum_a min_x p_x Tr(rho M_{a|x})
 *
 * Entangled probe |phi> on C^d (x) C^d, measured on side A: outcome a steers
 * side B to reduced states rho_{a|x} with weights p_x p(a|x), and
 *
 *   ame(phi) = sum_a as_value[{rho_{a|x}}_x, {p_x p(a|x)}_x].
 *
 * ame is evaluated at a given probe; the certification theorems supply it.
 */

struct ProbeState {
    PureState state;
};

// One outcome's steered ensemble.  Entries with weight below 1e-12 carry no
// defined reduced state and are excluded from the exclusion instance.
struct OutcomeEnsemble {
    std::size_t outcome = 0;
    std::vector<std::optional<DensityOperator>> reduced_states;  // indexed by setting
    std::vector<double> weights;                                 // p_x * p(a|x, probe)
};

std::vector<OutcomeEnsemble> reduced_ensembles(const MeasurementEnsemble& ensemble,
                                               const BipartiteState& probe,
                                               const Tolerances& tol = {});

struct AmeOutcome {
    std::size_t outcome = 0;
    double as = 0.0;
    double weight_sum = 0.0;
    ExclusionResult exclusion;  // default (empty povm) when every weight vanished
};

struct AmeResult {
    double ame = 0.0;
    std::vector<AmeOutcome> per_outcome;
};

AmeResult ame_for_probe(const MeasurementEnsemble& ensemble, const BipartiteState& probe,
                        const SolverOptions& opts = {});

double ams_evaluate(const MeasurementEnsemble& ensemble, const ProbeState& probe);

struct AmsOptimum {
    double best = 0.0;  // lower bound on the single-system value
    ProbeState probe;
};

// Multi-start coordinate ascent over pure probes (magnitudes via hyperspherical
// angles, phases explicit, global phase fixed).  Pure probes suffice: the inner
// sum of minima is concave in rho, so its minimum over density operators is
// attained at an extreme point.  Deterministic for a fixed seed.
AmsOptimum ams_optimize(const MeasurementEnsemble& ensemble, std::size_t restarts,
                        std::uint64_t seed);

// Raised when an exact search would exceed the supported instance size.
class CapabilityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Lemma2Result {
    bool feasible = false;
    std::optional<ProbeState> witness;
};

// Structural necessary condition for a perfect single-system probe: a unit
// vector orthogonal to at least one effect vector of every outcome.  Searches
// all per-outcome selections with subspace pruning; feasible = false certifies
// that no single-system probe reaches 1.  Selection count l^f is capped at 1e7.
Lemma2Result lemma2_feasible(const MeasurementEnsemble& ensemble);

// Necessary condition for the steered ensembles to be pairwise hard to tell
// apart: within every outcome, all pairs of reduced states overlap.
bool reduced_pairwise_overlap_check(const std::vector<OutcomeEnsemble>& ensembles);

enum class TheoremTag { T1, T2, T3 };

const char* theorem_tag_name(TheoremTag tag);

struct PerOutcomeAs {
    std::size_t outcome = 0;
    double as = 0.0;
    double weight_sum = 0.0;
};

struct VerificationReport {
    TheoremTag theorem = TheoremTag::T1;
    double parameter_used = 0.0;
    double bound = 0.0;
    double ame = 0.0;
    std::vector<PerOutcomeAs> per_outcome_as;
    bool ams_structural = false;   // true would mean a perfect single-system probe may exist
    double ams_numeric_best = 0.0;
    bool passed = false;
};

struct VerifyOptions {
    double theorem_tol = 1e-6;
    std::uint64_t seed = 0;
    std::size_t restarts = 24;
    std::size_t max_iterations = 100000;
    double gap_tol = 1e-7;
    // Multiplies the squared family parameter (tan^2 x, omega^2, epsilon^2)
    // before construction, capped below 1 for the paired families; values
    // other than 1 leave the certified region and normally fail verification.
    double param_scale = 1.0;
};

// End-to-end certification for one probe state: build the dimension-matched
// family, evaluate ame at the probe, run the structural single-system check
// and the numeric single-system ascent, and combine into the pass verdict:
// ame >= 1 - theorem_tol, structural check infeasible, numeric best <= 1 - 1e-4.
VerificationReport verify_theorem(const BipartiteState& state, const VerifyOptions& options = {});

VerificationReport verify_theorem(const BipartiteState& state, double theorem_tol,
                                  std::uint64_t seed);

}  // namespace anticert
