#include "doctest.h"

#include <cmath>
#include <random>

#include "anticert/exclusion.hpp"

using namespace anticert;

namespace {

PureState random_pure(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cxd> v(dim);
    double n2 = 0.0;
    for (auto& x : v) {
        x = cxd{g(rng), g(rng)};
        n2 += std::norm(x);
    }
    for (auto& x : v) x /= std::sqrt(n2);
    return PureState(std::move(v));
}

DensityOperator random_mixed(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix a(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) a(i, j) = cxd{g(rng), g(rng)};
    auto m = a * a.adjoint();
    return DensityOperator(m.scaled(1.0 / m.trace().real()));
}

double trace_norm(const ComplexMatrix& h) {
    double s = 0.0;
    for (double v : hermitian_eig(h).values) s += std::abs(v);
    return s;
}

double lambda_min(const ComplexMatrix& h) { return hermitian_eig(h).values.back(); }

// every invariant an ExclusionResult promises, asserted in one place
void check_result(const ExclusionInstance& inst, const ExclusionResult& res, double gap_tol) {
    const std::size_t n = inst.states.front().dim();
    REQUIRE(res.povm.size() == inst.states.size());

    ComplexMatrix sum(n, n);
    for (const auto& m : res.povm) {
        REQUIRE(m.is_hermitian(1e-9));
        REQUIRE(lambda_min(m) >= -1e-8);
        sum += m;
    }
    REQUIRE(sum.max_abs_diff(ComplexMatrix::identity(n)) < 1e-8);

    for (std::size_t k = 0; k < inst.states.size(); ++k) {
        auto slack = inst.states[k].matrix().scaled(inst.weights[k]) - res.dual_certificate;
        REQUIRE(lambda_min(slack) >= -1e-8);
    }

    REQUIRE(res.duality_gap >= -1e-12);
    REQUIRE(res.duality_gap <= gap_tol);
    REQUIRE(res.primal_value >= res.dual_value - 1e-12);

    double qsum = 0.0;
    for (double q : inst.weights) qsum += q;
    REQUIRE(res.as_value == doctest::Approx(qsum - res.primal_value).epsilon(1e-12));

    // perfect results must keep every outcome live
    if (res.as_value >= qsum - 1e-7) {
        for (const auto& m : res.povm) REQUIRE(m.trace().real() >= 1e-8);
    }
}

ExclusionInstance trine_instance(double q1 = 1.0 / 3.0, double q2 = 1.0 / 3.0,
                                 double q3 = 1.0 / 3.0) {
    auto state = [](double angle) {
        return DensityOperator(
            PureState({cxd{std::cos(angle), 0.0}, cxd{std::sin(angle), 0.0}}));
    };
    return ExclusionInstance{
        {state(0.0), state(2.0 * M_PI / 3.0), state(4.0 * M_PI / 3.0)}, {q1, q2, q3}};
}

// Three pure qubit states whose Bloch vectors are coplanar with all circular
// gaps below pi admit a positive identity resolution, hence perfect exclusion.
std::vector<DensityOperator> certified_triple(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    std::normal_distribution<double> g(0.0, 1.0);

    // random orthonormal plane basis in R^3
    std::array<double, 3> e1{g(rng), g(rng), g(rng)};
    double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& v : e1) v /= n1;
    std::array<double, 3> e2{g(rng), g(rng), g(rng)};
    double dot = e1[0] * e2[0] + e1[1] * e2[1] + e1[2] * e2[2];
    for (std::size_t i = 0; i < 3; ++i) e2[i] -= dot * e1[i];
    double n2 = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
    for (auto& v : e2) v /= n2;

    std::array<double, 3> phis{};
    for (;;) {
        for (auto& p : phis) p = uni(rng);
        std::array<double, 3> sorted = phis;
        std::sort(sorted.begin(), sorted.end());
        const double g1 = sorted[1] - sorted[0];
        const double g2 = sorted[2] - sorted[1];
        const double g3 = 2.0 * M_PI - g1 - g2;
        if (g1 < M_PI - 0.05 && g2 < M_PI - 0.05 && g3 < M_PI - 0.05) break;
    }

    std::vector<DensityOperator> states;
    for (double phi : phis) {
        std::array<double, 3> b{};
        for (std::size_t i = 0; i < 3; ++i) b[i] = std::cos(phi) * e1[i] + std::sin(phi) * e2[i];
        ComplexMatrix rho(2, 2);
        rho(0, 0) = 0.5 * (1.0 + b[2]);
        rho(1, 1) = 0.5 * (1.0 - b[2]);
        rho(0, 1) = 0.5 * cxd{b[0], -b[1]};
        rho(1, 0) = 0.5 * cxd{b[0], b[1]};
        states.emplace_back(rho);
    }
    return states;
}

}  // namespace

TEST_CASE("orthogonal pair excludes perfectly") {
    ExclusionInstance inst{{DensityOperator(PureState::computational(2, 0)),
                            DensityOperator(PureState::computational(2, 1))},
                           {0.5, 0.5}};
    auto res = as_value(inst);
    CHECK(res.as_value == doctest::Approx(1.0).epsilon(1e-9));
    check_result(inst, res, 1e-7);
}

TEST_CASE("identical states give half the total weight") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        auto rho = random_mixed(2, rng);
        ExclusionInstance inst{{rho, rho}, {0.5, 0.5}};
        auto res = as_value(inst);
        CHECK(res.as_value == doctest::Approx(0.5).epsilon(1e-8));
        check_result(inst, res, 1e-7);
    }
}

TEST_CASE("trine states are perfectly excludable") {
    auto inst = trine_instance();
    auto res = as_value(inst);
    CHECK(res.as_value == doctest::Approx(1.0).epsilon(1e-7));
    check_result(inst, res, 1e-7);
}

TEST_CASE("single-state instance cannot be excluded at all") {
    std::mt19937_64 rng(42);
    ExclusionInstance inst{{random_mixed(3, rng)}, {0.7}};
    auto res = as_value(inst);
    CHECK(res.as_value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.povm.size() == 1);
    CHECK(res.povm[0].max_abs_diff(ComplexMatrix::identity(3)) == 0.0);
}

TEST_CASE("two-state instances match the trace-norm closed form") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> qdist(0.2, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t dim = (trial < 600) ? 2 : 3;
        auto r1 = random_mixed(dim, rng);
        auto r2 = random_mixed(dim, rng);
        const double q1 = qdist(rng), q2 = qdist(rng);
        ExclusionInstance inst{{r1, r2}, {q1, q2}};

        const double inner_min =
            0.5 * (q1 + q2) - 0.5 * trace_norm(r1.matrix().scaled(q1) - r2.matrix().scaled(q2));
        const double oracle = (q1 + q2) - inner_min;

        auto res = as_value(inst);
        REQUIRE(std::abs(res.as_value - oracle) <= 1e-6);
    }
}

TEST_CASE("weight scaling is exactly linear") {
    auto base = trine_instance(0.5, 0.3, 0.2);
    auto res = as_value(base);
    for (double c : {0.3, 2.5}) {
        auto scaled = base;
        for (auto& q : scaled.weights) q *= c;
        auto res_c = as_value(scaled);
        CHECK(std::abs(res_c.as_value - c * res.as_value) <= 1e-8);
        check_result(scaled, res_c, 1e-7);
    }
}

TEST_CASE("solver output is deterministic for a fixed seed") {
    std::mt19937_64 rng(44);
    ExclusionInstance inst{{random_mixed(3, rng), random_mixed(3, rng), random_mixed(3, rng)},
                           {0.4, 0.9, 1.1}};
    SolverOptions opts;
    opts.seed = 7;
    auto a = as_value(inst, opts);
    auto b = as_value(inst, opts);
    CHECK(a.as_value == b.as_value);
    CHECK(a.iterations == b.iterations);
    check_result(inst, a, opts.gap_tol);
}

TEST_CASE("non-convergence raises an error carrying the best gap") {
    std::mt19937_64 rng(45);
    ExclusionInstance inst{{random_mixed(3, rng), random_mixed(3, rng), random_mixed(3, rng)},
                           {0.5, 0.7, 0.9}};
    SolverOptions opts;
    opts.gap_tol = 1e-15;
    opts.max_iterations = 3;
    try {
        as_value(inst, opts);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_gap() > 1e-15);
    }
}

TEST_CASE("pairwise overlap condition") {
    PureState e0 = PureState::computational(2, 0);
    PureState e1 = PureState::computational(2, 1);
    auto trine = trine_instance();

    auto vec = [](const DensityOperator& rho) {
        auto eig = hermitian_eig(rho.matrix());
        std::vector<cxd> v(rho.dim());
        for (std::size_t i = 0; i < rho.dim(); ++i) v[i] = eig.vectors(i, 0);
        return PureState(std::move(v));
    };
    CHECK(barrett_sufficient(vec(trine.states[0]), vec(trine.states[1]), vec(trine.states[2])));
    CHECK_FALSE(barrett_sufficient(e0, e0, e1));
    CHECK(barrett_sufficient(PureState::computational(3, 0), PureState::computational(3, 1),
                             PureState::computational(3, 2)));
}

TEST_CASE("overlap condition implies perfect exclusion at uniform weights") {
    std::mt19937_64 rng(46);
    int tested = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t dim = (trial % 2 == 0) ? 2 : 3;
        auto p1 = random_pure(dim, rng);
        auto p2 = random_pure(dim, rng);
        auto p3 = random_pure(dim, rng);
        if (!barrett_sufficient(p1, p2, p3)) continue;
        ++tested;
        ExclusionInstance inst{{DensityOperator(p1), DensityOperator(p2), DensityOperator(p3)},
                               {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
        auto res = as_value(inst);
        REQUIRE(res.as_value == doctest::Approx(1.0).epsilon(1e-6));
        check_result(inst, res, 1e-7);
    }
    CHECK(tested >= 3);  // the sample must actually exercise the property
}

TEST_CASE("identity resolution certificate: known qubit triples") {
    // steered triple at lambda = 1/2, x = pi/3: the planar 120-degree set
    auto cert = heinosaari_certificate(trine_instance().states);
    REQUIRE(cert.has_value());
    for (double mu : cert->mu) CHECK(mu == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    auto basis = heinosaari_certificate({DensityOperator(PureState::computational(2, 0)),
                                         DensityOperator(PureState::computational(2, 1))});
    REQUIRE(basis.has_value());
    CHECK(basis->mu[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(basis->mu[1] == doctest::Approx(1.0).epsilon(1e-9));

    auto degenerate = heinosaari_certificate({DensityOperator(PureState::computational(2, 0)),
                                              DensityOperator(PureState::computational(2, 0))});
    CHECK_FALSE(degenerate.has_value());

    CHECK_THROWS_AS(heinosaari_certificate({DensityOperator(PureState::computational(3, 0))}),
                    DimensionError);
}

TEST_CASE("identity resolution implies perfect exclusion") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> qdist(0.1, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto states = certified_triple(rng);
        auto cert = heinosaari_certificate(states);
        REQUIRE(cert.has_value());

        ComplexMatrix resolved(2, 2);
        for (std::size_t i = 0; i < 3; ++i) resolved += states[i].matrix().scaled(cert->mu[i]);
        REQUIRE(resolved.max_abs_diff(ComplexMatrix::identity(2)) < 1e-8);

        ExclusionInstance inst{states, {qdist(rng), qdist(rng), qdist(rng)}};
        double qsum = inst.weights[0] + inst.weights[1] + inst.weights[2];
        auto res = as_value(inst);
        REQUIRE(res.as_value == doctest::Approx(qsum).epsilon(1e-6));
        check_result(inst, res, 1e-7);
    }
}

TEST_CASE("closed-form identity-resolution coefficients") {
    auto at = theorem1_mu_closed_form(0.5, M_PI / 3.0);
    for (double v : at.mu) CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    for (double v : at.mu_prime) CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    auto boundary = theorem1_mu_closed_form(0.5, M_PI / 4.0);
    CHECK(boundary.mu[0] == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(48);
    std::uniform_real_distribution<double> ldist(0.05, 0.95);
    std::uniform_real_distribution<double> margin(1.05, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double lambda = ldist(rng);
        const double bound = std::max(lambda / (1.0 - lambda), (1.0 - lambda) / lambda);
        const double x = std::atan(std::sqrt(margin(rng) * bound));
        auto mt = theorem1_mu_closed_form(lambda, x);
        for (double v : mt.mu) REQUIRE(v > 0.0);
        for (double v : mt.mu_prime) REQUIRE(v > 0.0);
    }

    CHECK_THROWS_AS(theorem1_mu_closed_form(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(theorem1_mu_closed_form(0.5, 0.0), ValidationError);
}

TEST_CASE("instance validation") {
    std::mt19937_64 rng(49);
    auto r2 = random_mixed(2, rng);
    auto r3 = random_mixed(3, rng);
    CHECK_THROWS_AS(as_value(ExclusionInstance{{}, {}}), ValidationError);
    CHECK_THROWS_AS(as_value(ExclusionInstance{{r2}, {1.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(as_value(ExclusionInstance{{r2, r3}, {1.0, 1.0}}), DimensionError);
    CHECK_THROWS_AS(as_value(ExclusionInstance{{r2, r2}, {1.0, 0.0}}), ValidationError);
}
