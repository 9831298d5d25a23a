#include "anticert/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace anticert {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cxd> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
    if (a_.size() != rows_ * cols_)
        throw DimensionError("entry count " + std::to_string(a_.size()) +
                             " does not match " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& o) const {
    ComplexMatrix r = *this;
    r += o;
    return r;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& o) const {
    ComplexMatrix r = *this;
    r -= o;
    return r;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix add: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix sub: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& o) const {
    if (cols_ != o.rows_) throw DimensionError("matrix mul: shape mismatch");
    ComplexMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const cxd aik = a_[i * cols_ + k];
            if (aik == cxd{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < o.cols_; ++j)
                r.a_[i * o.cols_ + j] += aik * o.a_[k * o.cols_ + j];
        }
    return r;
}

ComplexMatrix ComplexMatrix::scaled(cxd s) const {
    ComplexMatrix r = *this;
    for (auto& v : r.a_) v *= s;
    return r;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            r(j, i) = std::conj((*this)(i, j));
    return r;
}

cxd ComplexMatrix::trace() const {
    if (rows_ != cols_) throw DimensionError("trace of non-square matrix");
    cxd t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double ComplexMatrix::max_abs_diff(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
    return m;
}

bool ComplexMatrix::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
}

bool ComplexMatrix::is_psd(double tol) const {
    if (!is_hermitian(tol)) return false;
    auto eig = hermitian_eig(*this, tol);
    return eig.values.empty() || eig.values.back() >= -tol;
}

bool ComplexMatrix::is_projector(double tol) const {
    if (!is_hermitian(tol)) return false;
    return ((*this) * (*this)).max_abs_diff(*this) <= tol;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cxd aij = a(i, j);
            if (aij == cxd{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

ComplexMatrix partial_trace_a(const ComplexMatrix& rho, std::size_t da) {
    if (rho.rows() != rho.cols()) throw DimensionError("partial trace of non-square matrix");
    if (da == 0 || rho.rows() % da != 0)
        throw DimensionError("subsystem dimension " + std::to_string(da) +
                             " does not divide " + std::to_string(rho.rows()));
    const std::size_t db = rho.rows() / da;
    ComplexMatrix r(db, db);
    for (std::size_t i = 0; i < db; ++i)
        for (std::size_t j = 0; j < db; ++j) {
            cxd s{0.0, 0.0};
            for (std::size_t k = 0; k < da; ++k) s += rho(k * db + i, k * db + j);
            r(i, j) = s;
        }
    return r;
}

ComplexMatrix partial_trace_b(const ComplexMatrix& rho, std::size_t db) {
    if (rho.rows() != rho.cols()) throw DimensionError("partial trace of non-square matrix");
    if (db == 0 || rho.rows() % db != 0)
        throw DimensionError("subsystem dimension " + std::to_string(db) +
                             " does not divide " + std::to_string(rho.rows()));
    const std::size_t da = rho.rows() / db;
    ComplexMatrix r(da, da);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j) {
            cxd s{0.0, 0.0};
            for (std::size_t k = 0; k < db; ++k) s += rho(i * db + k, j * db + k);
            r(i, j) = s;
        }
    return r;
}

namespace {

// One two-sided Jacobi rotation zeroing H(p,q). The off-diagonal element is
// first rotated onto the real axis (phase phi), then a real rotation with
// angle theta is applied:  U(p,p)=c, U(p,q)=-s e^{i phi}, U(q,p)=s e^{-i phi},
// U(q,q)=c.  H <- U^dagger H U, V <- V U.
void jacobi_rotate(ComplexMatrix& h, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const cxd hpq = h(p, q);
    const double apq = std::abs(hpq);
    if (apq == 0.0) return;
    const cxd phase = hpq / apq;                       // e^{i phi}
    const double app = h(p, p).real();
    const double aqq = h(q, q).real();

    double t;  // tan(theta)
    const double diff = app - aqq;
    if (std::abs(diff) < 1e-300 * apq) {
        t = 1.0;
    } else {
        const double tau = diff / (2.0 * apq);
        t = ((tau >= 0.0) ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    }
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const std::size_t n = h.rows();
    const cxd up = c;                   // U(p,p) = U(q,q) = c
    const cxd upq = -s * phase;         // U(p,q)
    const cxd uqp = s * std::conj(phase);  // U(q,p)

    // H <- U^dagger H U: update columns p,q then rows p,q
    for (std::size_t i = 0; i < n; ++i) {
        const cxd hip = h(i, p), hiq = h(i, q);
        h(i, p) = hip * up + hiq * uqp;
        h(i, q) = hip * upq + hiq * up;
    }
    for (std::size_t j = 0; j < n; ++j) {
        const cxd hpj = h(p, j), hqj = h(q, j);
        h(p, j) = std::conj(up) * hpj + std::conj(uqp) * hqj;
        h(q, j) = std::conj(upq) * hpj + std::conj(up) * hqj;
    }
    h(p, q) = 0.0;
    h(q, p) = 0.0;
    h(p, p) = cxd{h(p, p).real(), 0.0};
    h(q, q) = cxd{h(q, q).real(), 0.0};

    for (std::size_t i = 0; i < n; ++i) {
        const cxd vip = v(i, p), viq = v(i, q);
        v(i, p) = vip * up + viq * uqp;
        v(i, q) = vip * upq + viq * up;
    }
}

double offdiag_norm(const ComplexMatrix& h) {
    double s = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j)
            if (i != j) s += std::norm(h(i, j));
    return std::sqrt(s);
}

}  // namespace

EigenDecomposition hermitian_eig(const ComplexMatrix& h, double herm_tol) {
    if (h.rows() != h.cols()) throw DimensionError("eigendecomposition of non-square matrix");
    const double scale = std::max(1.0, h.max_abs());
    if (!h.is_hermitian(herm_tol * scale))
        throw ValidationError("hermitian_eig: input is not Hermitian within tolerance");

    const std::size_t n = h.rows();
    ComplexMatrix a = h;
    // symmetrize so accumulated rotations stay exactly unitary on the model
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = cxd{a(i, i).real(), 0.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            const cxd m = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = m;
            a(j, i) = std::conj(m);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double stop = 1e-15 * std::max(1.0, a.frobenius_norm());
    for (int sweep = 0; sweep < 100 && offdiag_norm(a) > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > stop / (double)(n * n)) jacobi_rotate(a, v, p, q);
    }

    EigenDecomposition out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

ComplexMatrix hermitian_function(const ComplexMatrix& h,
                                 const std::function<double(double)>& f) {
    auto eig = hermitian_eig(h);
    const std::size_t n = h.rows();
    ComplexMatrix r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fv = f(eig.values[k]);
        if (fv == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                r(i, j) += fv * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return r;
}

ComplexMatrix outer_product(const std::vector<cxd>& u, const std::vector<cxd>& v) {
    ComplexMatrix r(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            r(i, j) = u[i] * std::conj(v[j]);
    return r;
}

cxd trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows() || a.rows() != b.cols())
        throw DimensionError("trace product: shape mismatch");
    cxd s{0.0, 0.0};
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(j, i);
    return s;
}

}  // namespace anticert
