#include "anticert/quantum_model.hpp"

#include <algorithm>
#include <cmath>

namespace anticert {

PureState::PureState(std::vector<cxd> amplitudes, const Tolerances& tol)
    : amps_(std::move(amplitudes)) {
    if (amps_.empty()) throw ValidationError("pure state: empty amplitude vector");
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    if (std::abs(std::sqrt(n2) - 1.0) > tol.algebraic)
        throw ValidationError("pure state: amplitudes are not unit norm");
}

PureState PureState::computational(std::size_t dim, std::size_t k) {
    std::vector<cxd> a(dim, cxd{0.0, 0.0});
    a.at(k) = 1.0;
    return PureState(std::move(a));
}

ComplexMatrix PureState::projector() const {
    return outer_product(amps_, amps_);
}

cxd inner(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw DimensionError("inner product: dimension mismatch");
    cxd s{0.0, 0.0};
    for (std::size_t k = 0; k < a.dim(); ++k) s += std::conj(a[k]) * b[k];
    return s;
}

DensityOperator::DensityOperator(ComplexMatrix m, const Tolerances& tol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("density operator: non-square matrix");
    if (!m_.is_hermitian(tol.algebraic))
        throw ValidationError("density operator: not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > tol.algebraic ||
        std::abs(m_.trace().imag()) > tol.algebraic)
        throw ValidationError("density operator: trace is not 1");
    if (!m_.is_psd(tol.algebraic))
        throw ValidationError("density operator: not positive semidefinite");
}

DensityOperator::DensityOperator(const PureState& psi) : m_(psi.projector()) {}

DensityOperator partial_trace_a(const DensityOperator& rho, std::size_t da) {
    return DensityOperator(partial_trace_a(rho.matrix(), da));
}

ProjectiveMeasurement::ProjectiveMeasurement(std::size_t dim, std::vector<PureState> effect_vectors,
                                             const Tolerances& tol)
    : dim_(dim), vectors_(std::move(effect_vectors)) {
    effects_.reserve(vectors_.size());
    for (const auto& v : vectors_) {
        if (v.dim() != dim_) throw DimensionError("measurement: effect vector dimension mismatch");
        effects_.push_back(v.projector());
    }
    validate(tol);
}

ProjectiveMeasurement::ProjectiveMeasurement(std::size_t dim,
                                             const std::vector<ComplexMatrix>& effects,
                                             const Tolerances& tol)
    : dim_(dim), effects_(effects) {
    vectors_.reserve(effects_.size());
    for (const auto& e : effects_) {
        if (e.rows() != dim_ || e.cols() != dim_)
            throw DimensionError("measurement: effect dimension mismatch");
        auto eig = hermitian_eig(e, tol.algebraic);
        std::vector<cxd> v(dim_);
        for (std::size_t i = 0; i < dim_; ++i) v[i] = eig.vectors(i, 0);
        vectors_.emplace_back(std::move(v), tol);
    }
    validate(tol);
}

void ProjectiveMeasurement::validate(const Tolerances& tol) const {
    if (effects_.empty()) throw ValidationError("measurement: no effects");
    ComplexMatrix sum(dim_, dim_);
    for (const auto& e : effects_) {
        if (!e.is_projector(tol.algebraic))
            throw ValidationError("measurement: effect is not a projector");
        if (std::abs(e.trace().real() - 1.0) > tol.algebraic)
            throw ValidationError("measurement: effect is not rank one");
        sum += e;
    }
    if (sum.max_abs_diff(ComplexMatrix::identity(dim_)) > tol.algebraic)
        throw ValidationError("measurement: effects do not sum to identity");
}

MeasurementEnsemble::MeasurementEnsemble(std::vector<ProjectiveMeasurement> measurements,
                                         std::vector<double> priors, const Tolerances& tol)
    : measurements_(std::move(measurements)), priors_(std::move(priors)) {
    if (measurements_.empty()) throw ValidationError("ensemble: no measurements");
    if (priors_.size() != measurements_.size())
        throw ValidationError("ensemble: prior count does not match measurement count");
    for (const auto& m : measurements_) {
        if (m.dim() != measurements_[0].dim() || m.outcomes() != measurements_[0].outcomes())
            throw ValidationError("ensemble: measurements disagree on dim or outcome count");
    }
    double s = 0.0;
    for (double p : priors_) {
        if (p <= 0.0) throw ValidationError("ensemble: priors must be strictly positive");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("ensemble: priors do not sum to 1");
    (void)tol;
}

BipartiteState::BipartiteState(std::vector<cxd> schmidt_coeffs, std::vector<PureState> basis_a,
                               std::vector<PureState> basis_b, const Tolerances& tol)
    : coeffs_(std::move(schmidt_coeffs)), basis_a_(std::move(basis_a)), basis_b_(std::move(basis_b)) {
    const std::size_t d = coeffs_.size();
    if (d == 0) throw ValidationError("bipartite state: empty coefficient vector");
    if (basis_a_.size() != d || basis_b_.size() != d)
        throw ValidationError("bipartite state: basis size does not match dimension");
    double n2 = 0.0;
    for (const auto& c : coeffs_) n2 += std::norm(c);
    if (std::abs(n2 - 1.0) > tol.algebraic)
        throw ValidationError("bipartite state: squared coefficients do not sum to 1");
    for (const auto* basis : {&basis_a_, &basis_b_}) {
        for (std::size_t i = 0; i < d; ++i) {
            if ((*basis)[i].dim() != d)
                throw DimensionError("bipartite state: basis vector dimension mismatch");
            for (std::size_t j = i; j < d; ++j) {
                const cxd ip = inner((*basis)[i], (*basis)[j]);
                const double want = (i == j) ? 1.0 : 0.0;
                if (std::abs(ip - cxd{want, 0.0}) > tol.algebraic)
                    throw ValidationError("bipartite state: local basis is not orthonormal");
            }
        }
    }
}

bool BipartiteState::is_entangled(double zero_tol) const {
    std::size_t nonzero = 0;
    for (const auto& c : coeffs_)
        if (std::abs(c) > zero_tol) ++nonzero;
    return nonzero >= 2;
}

bool BipartiteState::is_full_schmidt_rank(double zero_tol) const {
    for (const auto& c : coeffs_)
        if (std::abs(c) <= zero_tol) return false;
    return true;
}

PureState BipartiteState::to_vector() const {
    const std::size_t d = dim();
    std::vector<cxd> v(d * d, cxd{0.0, 0.0});
    for (std::size_t a = 0; a < d; ++a) {
        if (coeffs_[a] == cxd{0.0, 0.0}) continue;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                v[i * d + j] += coeffs_[a] * basis_a_[a][i] * basis_b_[a][j];
    }
    return PureState(std::move(v));
}

DensityOperator BipartiteState::a_marginal() const {
    const std::size_t d = dim();
    ComplexMatrix m(d, d);
    for (std::size_t a = 0; a < d; ++a)
        m += basis_a_[a].projector().scaled(std::norm(coeffs_[a]));
    return DensityOperator(std::move(m));
}

BipartiteState schmidt_decompose(const PureState& psi, const Tolerances& tol) {
    const std::size_t dsq = psi.dim();
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt((double)dsq)));
    if (d * d != dsq)
        throw DimensionError("schmidt decomposition: dimension is not a perfect square");

    // coefficient matrix C with psi = sum_ij C(i,j) |i>|j>
    ComplexMatrix c(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) c(i, j) = psi[i * d + j];

    // rho_A = C C^dagger; its eigenvectors are the A-side Schmidt basis and
    // the coefficients are the square roots of its eigenvalues.
    auto eig = hermitian_eig(c * c.adjoint(), tol.algebraic);

    std::vector<cxd> coeffs(d);
    std::vector<PureState> basis_a;
    std::vector<PureState> basis_b;
    basis_a.reserve(d);
    basis_b.reserve(d);

    std::vector<std::vector<cxd>> bvecs;
    for (std::size_t k = 0; k < d; ++k) {
        const double s = std::sqrt(std::max(eig.values[k], 0.0));
        coeffs[k] = s;
        std::vector<cxd> u(d);
        for (std::size_t i = 0; i < d; ++i) u[i] = eig.vectors(i, k);
        basis_a.emplace_back(u, tol);
        if (s > 1e-12) {
            // b_k = C^T conj(u_k) / s reproduces psi = sum_k s_k |u_k>|b_k> exactly
            std::vector<cxd> b(d, cxd{0.0, 0.0});
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t i = 0; i < d; ++i) b[j] += c(i, j) * std::conj(u[i]) / s;
            bvecs.push_back(std::move(b));
        } else {
            bvecs.emplace_back();  // filled below by completion
        }
    }

    // complete the B basis for zero Schmidt coefficients
    for (std::size_t k = 0; k < d; ++k) {
        if (!bvecs[k].empty()) continue;
        for (std::size_t cand = 0; cand < d; ++cand) {
            std::vector<cxd> b(d, cxd{0.0, 0.0});
            b[cand] = 1.0;
            for (const auto& prev : bvecs) {
                if (prev.empty()) continue;
                cxd ov{0.0, 0.0};
                for (std::size_t j = 0; j < d; ++j) ov += std::conj(prev[j]) * b[j];
                for (std::size_t j = 0; j < d; ++j) b[j] -= ov * prev[j];
            }
            double n2 = 0.0;
            for (const auto& x : b) n2 += std::norm(x);
            if (n2 > 1e-6) {
                const double n = std::sqrt(n2);
                for (auto& x : b) x /= n;
                bvecs[k] = std::move(b);
                break;
            }
        }
        if (bvecs[k].empty())
            throw ValidationError("schmidt decomposition: basis completion failed");
    }
    for (std::size_t k = 0; k < d; ++k) basis_b.emplace_back(bvecs[k], tol);

    return BipartiteState(std::move(coeffs), std::move(basis_a), std::move(basis_b), tol);
}

}  // namespace anticert
