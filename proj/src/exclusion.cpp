#include "anticert/exclusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

namespace anticert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()).scaled(0.5); }

// Exact renormalization of PSD blocks into a POVM: congruence by the inverse
// square root of the block sum on its support, equal shares of the complement.
std::vector<ComplexMatrix> renormalize(const std::vector<ComplexMatrix>& blocks) {
    const std::size_t n = blocks.front().rows();
    const std::size_t count = blocks.size();
    ComplexMatrix s(n, n);
    for (const auto& b : blocks) s += b;
    s = hermitian_part(s);

    const double top = std::max(hermitian_eig(s).values.front(), 0.0);
    const double cut = std::max(1e-14 * top, 1e-300);
    auto isqrt = hermitian_function(s, [cut](double x) { return x > cut ? 1.0 / std::sqrt(x) : 0.0; });
    auto support = hermitian_function(s, [cut](double x) { return x > cut ? 1.0 : 0.0; });
    auto complement = ComplexMatrix::identity(n) - support;

    std::vector<ComplexMatrix> out;
    out.reserve(count);
    for (const auto& b : blocks)
        out.push_back(hermitian_part(isqrt * b * isqrt + complement.scaled(1.0 / double(count))));
    return out;
}

struct Bracket {
    double primal = kInf;   // best feasible value of the inner minimization
    double dual = -kInf;    // best feasible dual value
    std::vector<ComplexMatrix> povm;
    ComplexMatrix z;
    double gap() const { return primal - dual; }
};

// Scores a feasible POVM and derives a feasible dual point from it:
// Z0 = herm(sum_k w_k M_k) has Tr(Z0) equal to the primal value, and shifting
// by the largest violation of Z0 <= w_k restores dual feasibility.
void evaluate(const std::vector<ComplexMatrix>& w, const std::vector<ComplexMatrix>& povm,
              Bracket& br) {
    const std::size_t n = w.front().rows();
    double primal = 0.0;
    ComplexMatrix gamma(n, n);
    for (std::size_t k = 0; k < w.size(); ++k) {
        primal += trace_product(w[k], povm[k]).real();
        gamma += w[k] * povm[k];
    }
    auto z0 = hermitian_part(gamma);
    double shift = 0.0;
    for (const auto& wk : w) shift = std::max(shift, hermitian_eig(z0 - wk).values.front());
    const double dual = z0.trace().real() - shift * double(n);

    if (primal < br.primal) {
        br.primal = primal;
        br.povm = povm;
    }
    if (dual > br.dual) {
        br.dual = dual;
        br.z = z0 - ComplexMatrix::identity(n).scaled(shift);
    }
}

std::vector<ComplexMatrix> seeded_start(std::size_t n, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ComplexMatrix> blocks;
    blocks.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ComplexMatrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = cxd{g(rng), g(rng)};
        blocks.push_back(a * a.adjoint() + ComplexMatrix::identity(n).scaled(0.5 * double(n)));
    }
    return renormalize(blocks);
}

// Fixed-point iteration on the reflected objective: maximizing
// sum_k Tr((cI - w_k) M_k) over POVMs is equivalent to the minimization, and
// the congruence update M_k <- L^{-1/2} w'_k M_k w'_k L^{-1/2} with
// L = sum_k w'_k M_k w'_k preserves POVM structure and climbs monotonically
// in practice.  Stops on target gap, stall, or budget.
std::size_t fixed_point_phase(const std::vector<ComplexMatrix>& w,
                              std::vector<ComplexMatrix>& povm, Bracket& br, double target,
                              std::size_t budget) {
    const std::size_t n = w.front().rows();
    double c = 0.0;
    for (const auto& wk : w) c = std::max(c, hermitian_eig(wk).values.front());
    std::vector<ComplexMatrix> reflected;
    reflected.reserve(w.size());
    for (const auto& wk : w) reflected.push_back(ComplexMatrix::identity(n).scaled(c) - wk);

    double stall_gap = kInf;
    std::size_t stall_at = 0;
    std::size_t it = 0;
    while (it < budget && br.gap() > target) {
        ++it;
        std::vector<ComplexMatrix> blocks;
        blocks.reserve(w.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            blocks.push_back(hermitian_part(reflected[k] * povm[k] * reflected[k]));
        povm = renormalize(blocks);
        evaluate(w, povm, br);

        if (br.gap() < stall_gap * (1.0 - 1e-3)) {
            stall_gap = br.gap();
            stall_at = it;
        } else if (it - stall_at >= 300) {
            break;
        }
    }
    return it;
}

// Operator-splitting fallback for the same minimization: alternate an affine
// projection onto {sum_k X_k = I} with a PSD projection, driven by scaled
// dual variables.  Used only when the fixed-point phase stalls.
std::size_t splitting_phase(const std::vector<ComplexMatrix>& w, std::vector<ComplexMatrix>& povm,
                            Bracket& br, double target, std::size_t budget) {
    const std::size_t n = w.front().rows();
    const std::size_t count = w.size();
    double scale = 0.0;
    for (const auto& wk : w) scale = std::max(scale, wk.max_abs());
    const double t = std::max(scale, 1e-8);

    std::vector<ComplexMatrix> x = povm;
    std::vector<ComplexMatrix> y = povm;
    std::vector<ComplexMatrix> u(count, ComplexMatrix(n, n));

    std::size_t it = 0;
    while (it < budget && br.gap() > target) {
        ++it;
        ComplexMatrix defect = ComplexMatrix::identity(n);
        for (std::size_t k = 0; k < count; ++k) {
            x[k] = y[k] - u[k] - w[k].scaled(1.0 / t);
            defect -= x[k];
        }
        defect = defect.scaled(1.0 / double(count));
        for (std::size_t k = 0; k < count; ++k) {
            x[k] += defect;
            y[k] = hermitian_function(hermitian_part(x[k] + u[k]),
                                      [](double v) { return std::max(v, 0.0); });
            u[k] += x[k] - y[k];
        }
        if (it % 25 == 0 || it == budget) {
            povm = renormalize(y);
            evaluate(w, povm, br);
        }
    }
    return it;
}

struct SolveOutput {
    Bracket br;
    std::size_t iterations = 0;
};

SolveOutput solve_in_space(const std::vector<ComplexMatrix>& w, const SolverOptions& opts) {
    const double target = std::min(opts.gap_tol, 1e-11);
    auto povm = seeded_start(w.front().rows(), w.size(), opts.seed);

    SolveOutput out;
    evaluate(w, povm, out.br);
    out.iterations = fixed_point_phase(w, povm, out.br, target, opts.max_iterations);
    if (out.br.gap() > target && out.iterations < opts.max_iterations) {
        povm = out.br.povm;
        out.iterations +=
            splitting_phase(w, povm, out.br, target, opts.max_iterations - out.iterations);
    }
    return out;
}

// Perfect exclusion must leave every outcome with a live effect.  The
// congruence by T^{1/2}, T = I - eps P with P supported in the kernel of
// rho_k, followed by M_k += eps P, restores exact completeness and changes
// the objective only at order eps^2.
bool repair_null_outcomes(const std::vector<DensityOperator>& states,
                          std::vector<ComplexMatrix>& povm) {
    const std::size_t n = povm.front().rows();
    constexpr double eps = 1e-5;
    bool repaired = false;
    for (std::size_t k = 0; k < povm.size(); ++k) {
        if (povm[k].trace().real() >= 1e-6) continue;
        auto eig = hermitian_eig(states[k].matrix());
        if (eig.values.back() > 1e-10 * std::max(1.0, eig.values.front())) continue;
        std::vector<cxd> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = eig.vectors(i, n - 1);
        auto p = outer_product(v, v);
        auto t12 = ComplexMatrix::identity(n) - p.scaled(1.0 - std::sqrt(1.0 - eps));
        for (auto& effect : povm) effect = hermitian_part(t12 * effect * t12);
        povm[k] += p.scaled(eps);
        repaired = true;
    }
    return repaired;
}

}  // namespace

ExclusionResult as_value(const ExclusionInstance& instance, const SolverOptions& opts) {
    const std::size_t count = instance.states.size();
    if (count == 0) throw ValidationError("exclusion instance: no states");
    if (instance.weights.size() != count)
        throw ValidationError("exclusion instance: weight count does not match state count");
    const std::size_t n = instance.states.front().dim();
    double qsum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        if (instance.states[k].dim() != n)
            throw DimensionError("exclusion instance: states of different dimension");
        if (!(instance.weights[k] > 0.0))
            throw ValidationError("exclusion instance: weights must be strictly positive");
        qsum += instance.weights[k];
    }

    std::vector<ComplexMatrix> wfull;
    wfull.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        wfull.push_back(instance.states[k].matrix().scaled(instance.weights[k]));

    ExclusionResult result;
    result.dual_certificate = ComplexMatrix(n, n);

    if (count == 1) {
        // a single-outcome POVM is forced to the identity
        result.povm = {ComplexMatrix::identity(n)};
        result.dual_certificate = wfull[0];
        result.primal_value = wfull[0].trace().real();
        result.dual_value = result.primal_value;
        result.duality_gap = 0.0;
        result.as_value = qsum - result.primal_value;
        return result;
    }

    // restrict to the joint support of the weighted states; the complement
    // contributes nothing to the objective and is filled with equal shares
    ComplexMatrix total(n, n);
    for (const auto& wk : wfull) total += wk;
    auto teig = hermitian_eig(hermitian_part(total));
    const double cut = 1e-13 * std::max(teig.values.front(), 1e-300);
    std::size_t r = 0;
    while (r < n && teig.values[r] > cut) ++r;

    const bool reduced = (r < n);
    ComplexMatrix embed(n, r);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r; ++j) embed(i, j) = teig.vectors(i, j);

    std::vector<ComplexMatrix> w;
    w.reserve(count);
    for (const auto& wk : wfull)
        w.push_back(reduced ? hermitian_part(embed.adjoint() * wk * embed) : wk);

    auto out = solve_in_space(w, opts);

    auto lift = [&](const SolveOutput& o) {
        std::vector<ComplexMatrix> povm;
        ComplexMatrix z = o.br.z;
        if (reduced) {
            auto complement = ComplexMatrix::identity(n) - embed * embed.adjoint();
            for (const auto& m : o.br.povm)
                povm.push_back(hermitian_part(embed * m * embed.adjoint() +
                                              complement.scaled(1.0 / double(count))));
            z = embed * o.br.z * embed.adjoint();
        } else {
            povm = o.br.povm;
        }
        // re-certify in the ambient space
        double shift = 0.0;
        for (const auto& wk : wfull)
            shift = std::max(shift, hermitian_eig(hermitian_part(z - wk)).values.front());
        z = hermitian_part(z) - ComplexMatrix::identity(n).scaled(shift);
        double primal = 0.0;
        for (std::size_t k = 0; k < count; ++k) primal += trace_product(wfull[k], povm[k]).real();
        return std::tuple<std::vector<ComplexMatrix>, ComplexMatrix, double, double>(
            std::move(povm), std::move(z), primal, z.trace().real());
    };

    auto [povm, z, primal, dual] = lift(out);
    std::size_t iterations = out.iterations;

    if (primal - dual > opts.gap_tol && reduced) {
        // support restriction lost too much accuracy; redo in the full space
        auto out_full = solve_in_space(wfull, opts);
        std::vector<ComplexMatrix> povm2 = out_full.br.povm;
        ComplexMatrix z2 = out_full.br.z;
        double shift = 0.0;
        for (const auto& wk : wfull)
            shift = std::max(shift, hermitian_eig(hermitian_part(z2 - wk)).values.front());
        z2 = hermitian_part(z2) - ComplexMatrix::identity(n).scaled(shift);
        double primal2 = 0.0;
        for (std::size_t k = 0; k < count; ++k)
            primal2 += trace_product(wfull[k], povm2[k]).real();
        const double dual2 = z2.trace().real();
        if (primal2 - dual2 < primal - dual) {
            povm = std::move(povm2);
            z = std::move(z2);
            primal = primal2;
            dual = dual2;
        }
        iterations += out_full.iterations;
    }

    if (primal - dual > opts.gap_tol)
        throw ConvergenceError("exclusion solver: duality gap " + std::to_string(primal - dual) +
                                   " above tolerance after " + std::to_string(iterations) +
                                   " iterations",
                               primal - dual);

    if (primal <= 1e-6 * std::max(1.0, qsum)) {
        result.null_outcome_repaired = repair_null_outcomes(instance.states, povm);
        if (result.null_outcome_repaired) {
            primal = 0.0;
            for (std::size_t k = 0; k < count; ++k)
                primal += trace_product(wfull[k], povm[k]).real();
        }
    }

    result.povm = std::move(povm);
    result.dual_certificate = std::move(z);
    result.primal_value = primal;
    result.dual_value = dual;
    result.duality_gap = primal - dual;
    result.iterations = iterations;
    result.as_value = qsum - primal;
    return result;
}

bool barrett_sufficient(const PureState& psi1, const PureState& psi2, const PureState& psi3) {
    if (psi1.dim() != psi2.dim() || psi1.dim() != psi3.dim())
        throw DimensionError("overlap condition: states of different dimension");
    const double o12 = std::norm(inner(psi1, psi2));
    const double o13 = std::norm(inner(psi1, psi3));
    const double o23 = std::norm(inner(psi2, psi3));
    const double limit = 0.25 + 1e-12;
    return o12 <= limit && o13 <= limit && o23 <= limit;
}

std::optional<HeinosaariCertificate> heinosaari_certificate(
    const std::vector<DensityOperator>& states) {
    if (states.empty()) return std::nullopt;
    for (const auto& s : states)
        if (s.dim() != 2) throw DimensionError("identity resolution check requires qubit states");
    const std::size_t m = states.size();

    // real least squares for sum_i mu_i rho_i = I: four real equations per the
    // independent entries of a Hermitian 2x2 matrix
    auto row = [](const DensityOperator& s) {
        return std::array<double, 4>{s.matrix()(0, 0).real(), s.matrix()(1, 1).real(),
                                     s.matrix()(0, 1).real(), s.matrix()(0, 1).imag()};
    };
    const std::array<double, 4> rhs{1.0, 1.0, 0.0, 0.0};

    ComplexMatrix normal(m, m);
    std::vector<double> proj(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto ri = row(states[i]);
        for (std::size_t j = 0; j < m; ++j) {
            const auto rj = row(states[j]);
            double s = 0.0;
            for (std::size_t e = 0; e < 4; ++e) s += ri[e] * rj[e];
            normal(i, j) = s;
        }
        for (std::size_t e = 0; e < 4; ++e) proj[i] += ri[e] * rhs[e];
    }
    auto eig = hermitian_eig(normal);
    const double cutoff = 1e-12 * std::max(eig.values.front(), 1e-300);
    std::vector<double> mu(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        if (eig.values[k] <= cutoff) continue;
        double coeff = 0.0;
        for (std::size_t i = 0; i < m; ++i) coeff += eig.vectors(i, k).real() * proj[i];
        coeff /= eig.values[k];
        for (std::size_t i = 0; i < m; ++i) mu[i] += coeff * eig.vectors(i, k).real();
    }

    ComplexMatrix resolved(2, 2);
    for (std::size_t i = 0; i < m; ++i) resolved += states[i].matrix().scaled(mu[i]);
    if (resolved.max_abs_diff(ComplexMatrix::identity(2)) > 1e-8) return std::nullopt;
    for (double v : mu)
        if (v <= 1e-10) return std::nullopt;
    return HeinosaariCertificate{std::move(mu)};
}

MuTriples theorem1_mu_closed_form(double lambda, double x) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw ValidationError("lambda must lie strictly inside (0,1)");
    if (!(x > 0.0) || !(x < M_PI / 2.0))
        throw ValidationError("x must lie strictly inside (0, pi/2)");
    const double c2 = std::cos(x) * std::cos(x);
    const double s2 = std::sin(x) * std::sin(x);
    const double mu23 = (lambda * c2 + (1.0 - lambda) * s2) / (2.0 * (1.0 - lambda) * s2);
    const double mu1 = 1.0 - lambda * c2 / ((1.0 - lambda) * s2);
    const double mup23 = (lambda * s2 + (1.0 - lambda) * c2) / (2.0 * lambda * s2);
    const double mup1 = 1.0 - (1.0 - lambda) * c2 / (lambda * s2);
    return MuTriples{{mu1, mu23, mu23}, {mup1, mup23, mup23}};
}

}  // namespace anticert
