#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "anticert/quantum_model.hpp"

namespace anticert {

/*
 * Antidistinguishability of a weighted state set:
 *
 *   as_value[{rho_k},{q_k}] = sum_k q_k - min over POVMs {M_k} of sum_k q_k Tr(rho_k M_k)
 *
 * Weights are arbitrary positive reals; they are never normalized.  The inner
 * minimization is a small semidefinite program, solved to a certified duality
 * gap against the conic dual
 *
 *   max Tr(Z)  s.t.  Z Hermitian, Z <= q_k rho_k for every k.
 *
 * Every result carries both the primal POVM and a feasible dual certificate,
 * so the reported value is always bracketed numerically.
 */

struct ExclusionInstance {
    std::vector<DensityOperator> states;
    std::vector<double> weights;  // q_k > 0, need not sum to 1
};

struct SolverOptions {
    double gap_tol = 1e-7;
    std::size_t max_iterations = 100000;
    std::uint64_t seed = 0;
};

struct ExclusionResult {
    double as_value = 0.0;      // sum_k q_k minus the certified minimum
    double primal_value = 0.0;  // best feasible value of the inner minimization
    double dual_value = 0.0;    // Tr(Z) of the best feasible dual certificate
    double duality_gap = 0.0;   // primal_value - dual_value, always >= 0
    std::size_t iterations = 0;
    std::vector<ComplexMatrix> povm;  // effects, PSD, summing to the identity
    ComplexMatrix dual_certificate;   // Z with Z <= q_k rho_k for all k
    // Perfect exclusion must leave every outcome live; when the solver lands
    // on a vertex with a vanishing effect, a kernel-supported epsilon is
    // redistributed and this flag records the adjustment.
    bool null_outcome_repaired = false;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& message, double best_gap)
        : std::runtime_error(message), best_gap_(best_gap) {}
    double best_gap() const { return best_gap_; }

private:
    double best_gap_;
};

ExclusionResult as_value(const ExclusionInstance& instance, const SolverOptions& opts = {});

// Sufficient condition for perfect exclusion of three pure states with any
// positive weights: all pairwise squared overlaps at most 1/4.
bool barrett_sufficient(const PureState& psi1, const PureState& psi2, const PureState& psi3);

// Sufficient condition for perfect exclusion of qubit states: a positive
// resolution of the identity sum_i mu_i rho_i = I with every mu_i > 0.
struct HeinosaariCertificate {
    std::vector<double> mu;
};

// Least-squares solve of sum_i mu_i rho_i = I for qubit states.  Returns the
// certificate only if the residual is within 1e-8 and all mu_i are positive;
// absence is inconclusive (the condition is sufficient, not necessary).
std::optional<HeinosaariCertificate> heinosaari_certificate(
    const std::vector<DensityOperator>& states);

// Closed-form identity-resolution coefficients for the two steered qubit
// triples of family R at Schmidt weight lambda and angle x.  All six values
// are positive exactly when tan^2 x exceeds both lambda ratios.
struct MuTriples {
    std::array<double, 3> mu;        // triple steered by the first outcome
    std::array<double, 3> mu_prime;  // triple steered by the second outcome
};

MuTriples theorem1_mu_closed_form(double lambda, double x);

}  // namespace anticert
