#pragma once

#include <cstdint>
#include <vector>

#include "anticert/complex_matrix.hpp"

namespace anticert {

// Shared numeric thresholds. Algebraic identities (norms, Hermiticity,
// completeness) are held to `algebraic`; iteratively computed quantities
// (eigensolver residuals, Schmidt reconstruction) to `iterative`; the
// exclusion solver closes its duality gap to `solver_gap`.
struct Tolerances {
    double algebraic = 1e-9;
    double iterative = 1e-8;
    double solver_gap = 1e-7;
    long max_iterations = 100000;
};

/*
 * |psi> = sum_k amps[k] |k>, with ||amps||_2 = 1.
 */
class PureState {
public:
    PureState(std::vector<cxd> amplitudes, const Tolerances& tol = {});
    static PureState computational(std::size_t dim, std::size_t k);

    std::size_t dim() const { return amps_.size(); }
    const std::vector<cxd>& amplitudes() const { return amps_; }
    const cxd& operator[](std::size_t k) const { return amps_[k]; }

    ComplexMatrix projector() const;  // |psi><psi|

private:
    std::vector<cxd> amps_;
};

cxd inner(const PureState& a, const PureState& b);  // <a|b>

/*
 * Trace-one positive operator. The constructor enforces Hermiticity, PSD
 * and unit trace, so a DensityOperator value is always a valid state.
 */
class DensityOperator {
public:
    DensityOperator(ComplexMatrix m, const Tolerances& tol = {});
    explicit DensityOperator(const PureState& psi);

    std::size_t dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }

private:
    ComplexMatrix m_;
};

DensityOperator partial_trace_a(const DensityOperator& rho, std::size_t da);

/*
 * Rank-one projective measurement: effects {|v_a><v_a|}_{a=1..f} with
 * sum_a |v_a><v_a| = 1.  Completeness forces f = dim.  The effect vectors
 * are kept alongside the matrices; constructing from matrices recovers them
 * from the dominant eigenvector of each effect.
 */
class ProjectiveMeasurement {
public:
    ProjectiveMeasurement(std::size_t dim, std::vector<PureState> effect_vectors,
                          const Tolerances& tol = {});
    ProjectiveMeasurement(std::size_t dim, const std::vector<ComplexMatrix>& effects,
                          const Tolerances& tol = {});

    std::size_t dim() const { return dim_; }
    std::size_t outcomes() const { return vectors_.size(); }
    const std::vector<ComplexMatrix>& effects() const { return effects_; }
    const ComplexMatrix& effect(std::size_t a) const { return effects_[a]; }
    const PureState& effect_vector(std::size_t a) const { return vectors_[a]; }

private:
    void validate(const Tolerances& tol) const;

    std::size_t dim_;
    std::vector<PureState> vectors_;
    std::vector<ComplexMatrix> effects_;
};

/*
 * l measurements {M_{a|x}} sampled with prior p_x.  All share the same
 * dimension and outcome count f; priors are strictly positive and sum to 1.
 */
class MeasurementEnsemble {
public:
    MeasurementEnsemble(std::vector<ProjectiveMeasurement> measurements,
                        std::vector<double> priors, const Tolerances& tol = {});

    std::size_t dim() const { return measurements_[0].dim(); }
    std::size_t outcomes() const { return measurements_[0].outcomes(); }
    std::size_t settings() const { return measurements_.size(); }
    const std::vector<ProjectiveMeasurement>& measurements() const { return measurements_; }
    const ProjectiveMeasurement& measurement(std::size_t x) const { return measurements_[x]; }
    const std::vector<double>& priors() const { return priors_; }
    double prior(std::size_t x) const { return priors_[x]; }

private:
    std::vector<ProjectiveMeasurement> measurements_;
    std::vector<double> priors_;
};

/*
 * d (x) d pure state in Schmidt form:
 *   |phi> = sum_a coeffs[a] |basis_a[a]> (x) |basis_b[a]>
 * with sum |coeffs|^2 = 1 and both local bases orthonormal.
 */
class BipartiteState {
public:
    BipartiteState(std::vector<cxd> schmidt_coeffs, std::vector<PureState> basis_a,
                   std::vector<PureState> basis_b, const Tolerances& tol = {});

    std::size_t dim() const { return coeffs_.size(); }
    const std::vector<cxd>& schmidt_coeffs() const { return coeffs_; }
    cxd coeff(std::size_t a) const { return coeffs_.at(a); }
    const std::vector<PureState>& basis_a() const { return basis_a_; }
    const std::vector<PureState>& basis_b() const { return basis_b_; }

    bool is_entangled(double zero_tol = 1e-9) const;
    bool is_full_schmidt_rank(double zero_tol = 1e-9) const;

    PureState to_vector() const;        // amplitudes on C^{d^2}, A-major ordering
    DensityOperator a_marginal() const; // sum_a |c_a|^2 |A_a><A_a|

private:
    std::vector<cxd> coeffs_;
    std::vector<PureState> basis_a_;
    std::vector<PureState> basis_b_;
};

/// Canonical Schmidt form of a vector on C^{d x d}: coefficients real,
// non-negative, descending; phases pushed into basis_b.  Degenerate blocks
// inherit the deterministic ordering of the eigensolver.
BipartiteState schmidt_decompose(const PureState& psi, const Tolerances& tol = {});

}  // namespace anticert
