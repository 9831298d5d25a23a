#include "anticert/families.hpp"

#include <cmath>
#include <string>

namespace anticert {

namespace {

void check_basis(const std::vector<PureState>& basis, std::size_t dim, const Tolerances& tol) {
    if (basis.size() != dim)
        throw ValidationError("family basis: expected " + std::to_string(dim) + " vectors");
    for (std::size_t i = 0; i < dim; ++i) {
        if (basis[i].dim() != dim) throw DimensionError("family basis: vector dimension mismatch");
        for (std::size_t j = i + 1; j < dim; ++j)
            if (std::abs(inner(basis[i], basis[j])) > tol.algebraic)
                throw ValidationError("family basis: vectors are not orthogonal");
    }
}

void check_coeffs(const std::vector<cxd>& coeffs, std::size_t dim) {
    if (coeffs.size() != dim)
        throw ValidationError("family coefficients: expected " + std::to_string(dim) + " entries");
    for (const auto& c : coeffs)
        if (std::norm(c) <= 0.0)
            throw ValidationError("family coefficients: zero coefficient not allowed");
}

void check_interior(double value, const char* what) {
    if (!(value > 0.0) || !(value < 1.0))
        throw ValidationError(std::string(what) + " must lie strictly inside (0,1)");
}

PureState combine(const PureState& u, const PureState& v, cxd alpha, cxd beta) {
    std::vector<cxd> w(u.dim());
    for (std::size_t i = 0; i < u.dim(); ++i) w[i] = alpha * u[i] + beta * v[i];
    return PureState(std::move(w));
}

// Neighbour pairing shared by families S and Q: blocks {a, a+1} for even a,
// with in-block weights (w, s) and (s, -w), s = sqrt(1 - w^2).
ProjectiveMeasurement neighbour_pairing(const std::vector<PureState>& basis, double w,
                                        const Tolerances& tol) {
    const double s = std::sqrt(1.0 - w * w);
    std::vector<PureState> vecs;
    vecs.reserve(basis.size());
    for (std::size_t a = 0; a < basis.size(); a += 2) {
        vecs.push_back(combine(basis[a], basis[a + 1], w, s));
        vecs.push_back(combine(basis[a], basis[a + 1], s, -w));
    }
    return ProjectiveMeasurement(basis.size(), std::move(vecs), tol);
}

double ratio(const std::vector<cxd>& c, std::size_t a, std::size_t p) {
    const double ca = std::norm(c[a]);
    const double cp = std::norm(c[p]);
    return cp / (3.0 * ca + cp);
}

std::size_t neighbour_partner(std::size_t a) { return (a % 2 == 0) ? a + 1 : a - 1; }

// Measurement-3 partner in family Q: mirror everywhere except the four middle
// indices, which use shift-2 pairs.
std::size_t q_mirror_partner(std::size_t a, std::size_t n) {
    const std::size_t lo = (n - 4) / 2;  // first middle index
    if (a < lo || a > lo + 3) return n - 1 - a;
    return (a <= lo + 1) ? a + 2 : a - 2;
}

}  // namespace

MeasurementEnsemble build_family_R(const FamilyRParams& params, const Tolerances& tol) {
    check_interior(params.lambda, "lambda");
    if (!(params.x_angle > 0.0) || !(params.x_angle < M_PI / 2.0))
        throw ValidationError("x_angle must lie strictly inside (0, pi/2)");
    check_basis(params.basis, 2, tol);

    const PureState& psi = params.basis[0];
    const PureState& perp = params.basis[1];
    const double c = std::cos(params.x_angle);
    const double s = std::sin(params.x_angle);
    const cxd ph = std::polar(1.0, params.phase);

    std::vector<ProjectiveMeasurement> meas;
    meas.emplace_back(2, std::vector<PureState>{psi, perp}, tol);
    meas.emplace_back(2,
                      std::vector<PureState>{combine(psi, perp, c, ph * s),
                                             combine(psi, perp, s, -ph * c)},
                      tol);
    meas.emplace_back(2,
                      std::vector<PureState>{combine(psi, perp, c, -ph * s),
                                             combine(psi, perp, s, ph * c)},
                      tol);
    return MeasurementEnsemble(std::move(meas), {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, tol);
}

MeasurementEnsemble build_family_S(const FamilySParams& params, const Tolerances& tol) {
    const std::size_t m = params.m;
    if (m < 4 || m % 4 != 0)
        throw ValidationError("family S requires a dimension that is a multiple of 4");
    check_interior(params.omega, "omega");
    check_coeffs(params.coeffs, m);
    check_basis(params.basis, m, tol);

    const double w = params.omega;
    const double s = std::sqrt(1.0 - w * w);

    std::vector<ProjectiveMeasurement> meas;
    meas.emplace_back(m, params.basis, tol);
    meas.push_back(neighbour_pairing(params.basis, w, tol));

    // mirror pairing: blocks {a, m-1-a}
    std::vector<PureState> third;
    third.reserve(m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t p = m - 1 - a;
        if (a < m / 2)
            third.push_back(combine(params.basis[a], params.basis[p], w, s));
        else
            third.push_back(combine(params.basis[p], params.basis[a], s, -w));
    }
    meas.emplace_back(m, std::move(third), tol);
    return MeasurementEnsemble(std::move(meas), {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, tol);
}

MeasurementEnsemble build_family_Q(const FamilyQParams& params, const Tolerances& tol) {
    const std::size_t n = params.n;
    if (n < 6 || n % 4 != 2)
        throw ValidationError("family Q requires a dimension of the form 4p + 2, p >= 1");
    check_interior(params.epsilon, "epsilon");
    check_coeffs(params.coeffs, n);
    check_basis(params.basis, n, tol);

    const double e = params.epsilon;
    const double s = std::sqrt(1.0 - e * e);
    const std::size_t lo = (n - 4) / 2;

    std::vector<ProjectiveMeasurement> meas;
    meas.emplace_back(n, params.basis, tol);
    meas.push_back(neighbour_pairing(params.basis, e, tol));

    std::vector<PureState> third;
    third.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
        if (a < lo)
            third.push_back(combine(params.basis[a], params.basis[n - 1 - a], e, s));
        else if (a > lo + 3)
            third.push_back(combine(params.basis[a], params.basis[n - 1 - a], -e, s));
        else if (a <= lo + 1)
            third.push_back(combine(params.basis[a], params.basis[a + 2], e, s));
        else
            third.push_back(combine(params.basis[a - 2], params.basis[a], s, -e));
    }
    meas.emplace_back(n, std::move(third), tol);
    return MeasurementEnsemble(std::move(meas), {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, tol);
}

double theorem1_x_bound(double lambda) {
    check_interior(lambda, "lambda");
    return std::max(lambda / (1.0 - lambda), (1.0 - lambda) / lambda);
}

double theorem2_omega_bound(const std::vector<cxd>& coeffs) {
    const std::size_t m = coeffs.size();
    if (m < 4 || m % 2 != 0)
        throw ValidationError("omega bound requires an even coefficient count of at least 4");
    check_coeffs(coeffs, m);

    double bound = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
        bound = std::min(bound, ratio(coeffs, a, neighbour_partner(a)));
        bound = std::min(bound, ratio(coeffs, a, m - 1 - a));
    }
    return bound;
}

double theorem3_epsilon_bound(const std::vector<cxd>& coeffs) {
    const std::size_t n = coeffs.size();
    if (n < 6 || n % 4 != 2)
        throw ValidationError("epsilon bound requires a coefficient count of the form 4p + 2");
    check_coeffs(coeffs, n);

    double bound = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
        bound = std::min(bound, ratio(coeffs, a, neighbour_partner(a)));
        bound = std::min(bound, ratio(coeffs, a, q_mirror_partner(a, n)));
    }
    return bound;
}

const char* family_kind_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::R: return "R";
        case FamilyKind::S: return "S";
        case FamilyKind::Q: return "Q";
    }
    return "?";
}

FamilyChoice family_for_state(const BipartiteState& state, const Tolerances& tol) {
    const std::size_t d = state.dim();
    if (d % 2 != 0) throw DimensionError("family dispatch requires an even dimension");

    if (d == 2) {
        if (!state.is_entangled())
            throw ValidationError("family dispatch requires an entangled probe");
        const double lambda = std::norm(state.coeff(0));
        const double bound = theorem1_x_bound(lambda);
        const double x = std::atan(std::sqrt(2.0 * bound));
        FamilyRParams params{lambda, x, 0.0, state.basis_a()};
        return FamilyChoice{build_family_R(params, tol), FamilyKind::R, x, bound};
    }

    if (!state.is_full_schmidt_rank())
        throw ValidationError("family dispatch requires all Schmidt coefficients nonzero");

    if (d % 4 == 0) {
        const double bound = theorem2_omega_bound(state.schmidt_coeffs());
        const double omega = std::sqrt(bound);
        FamilySParams params{d, omega, state.schmidt_coeffs(), state.basis_a()};
        return FamilyChoice{build_family_S(params, tol), FamilyKind::S, omega, bound};
    }

    const double bound = theorem3_epsilon_bound(state.schmidt_coeffs());
    const double epsilon = std::sqrt(bound);
    FamilyQParams params{d, epsilon, state.schmidt_coeffs(), state.basis_a()};
    return FamilyChoice{build_family_Q(params, tol), FamilyKind::Q, epsilon, bound};
}

}  // namespace anticert
