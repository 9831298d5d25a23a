#pragma once

#include <cstddef>
#include <vector>

#include "anticert/quantum_model.hpp"

namespace anticert {

/*
 * Three-measurement families on C^d, one per residue of d:
 *
 *   R (d = 2):          {psi, psi_perp}, {psi', psi'_perp}, {psi_bar, psi_bar_perp}
 *                       psi'    = cos x psi + e^{i theta} sin x psi_perp
 *                       psi_bar = cos x psi - e^{i theta} sin x psi_perp
 *
 *   S (d = 0 mod 4):    basis {eta_a}; neighbour pairing (a, a+1) for even a
 *                       with weights (w, sqrt(1-w^2)); mirror pairing (a, m-1-a).
 *
 *   Q (d = 2 mod 4):    as S but the mirror pairing at the four middle indices
 *                       is replaced by shift-2 pairs, so that no block of
 *                       measurement 3 coincides with a block of measurement 2.
 *
 * All indices here are 0-based.  Priors are uniform (1/3 each).
 */

struct FamilyRParams {
    double lambda;                 // Schmidt weight of the intended probe, in (0,1)
    double x_angle;                // in (0, pi/2)
    double phase;                  // theta in the rotated vectors
    std::vector<PureState> basis;  // {psi, psi_perp}, orthonormal, dim 2
};

struct FamilySParams {
    std::size_t m;                 // m >= 4, m mod 4 == 0
    double omega;                  // in (0,1)
    std::vector<cxd> coeffs;       // probe Schmidt coefficients nu, length m, all nonzero
    std::vector<PureState> basis;  // {eta_a}, orthonormal, dim m
};

struct FamilyQParams {
    std::size_t n;                 // n >= 6, n mod 4 == 2
    double epsilon;                // in (0,1)
    std::vector<cxd> coeffs;       // probe Schmidt coefficients theta, length n, all nonzero
    std::vector<PureState> basis;  // {zeta_a}, orthonormal, dim n
};

MeasurementEnsemble build_family_R(const FamilyRParams& params, const Tolerances& tol = {});
MeasurementEnsemble build_family_S(const FamilySParams& params, const Tolerances& tol = {});
MeasurementEnsemble build_family_Q(const FamilyQParams& params, const Tolerances& tol = {});

// Infimum admissible tan^2(x) for family R with probe weight lambda:
// max{lambda/(1-lambda), (1-lambda)/lambda}.  The admissible region is the
// strict inequality tan^2(x) > bound.
double theorem1_x_bound(double lambda);

// Max admissible omega^2 for family S with probe coefficients nu: the minimum
// of |nu_p|^2 / (3|nu_a|^2 + |nu_p|^2) over every (outcome, partner) pair of
// measurements 2 and 3.  Equal moduli give 1/4; the result is always in (0, 1/4].
double theorem2_omega_bound(const std::vector<cxd>& coeffs);

// Max admissible epsilon^2 for family Q, same ratio structure as
// theorem2_omega_bound but over the Q pairing (mirror pairs outside the middle
// four indices, shift-2 pairs inside).
double theorem3_epsilon_bound(const std::vector<cxd>& coeffs);

enum class FamilyKind { R, S, Q };

const char* family_kind_name(FamilyKind kind);

struct FamilyChoice {
    MeasurementEnsemble ensemble;
    FamilyKind kind;
    double parameter;  // x (radians) for R, omega for S, epsilon for Q
    double bound;      // tan^2 bound for R, omega^2 bound for S, epsilon^2 bound for Q
};

// Dispatch on the Schmidt rank structure of the probe: d=2 -> R with
// tan^2 x = 2 * bound, d = 0 mod 4 -> S with omega^2 = bound, d = 2 mod 4 -> Q
// with epsilon^2 = bound.  The A-side Schmidt basis becomes the family basis.
// Odd d is rejected; d >= 4 requires full Schmidt rank, d = 2 entanglement.
FamilyChoice family_for_state(const BipartiteState& state, const Tolerances& tol = {});

}  // namespace anticert
