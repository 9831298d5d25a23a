#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anticert {

using cxd = std::complex<double>;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dense row-major complex matrix. Sizes here are tiny (d <= ~64), so
// everything is plain O(n^3) with no blocking.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, cxd{0.0, 0.0}) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cxd> entries);

    static ComplexMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<cxd>& entries() const { return a_; }

    cxd& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    ComplexMatrix operator+(const ComplexMatrix& o) const;
    ComplexMatrix operator-(const ComplexMatrix& o) const;
    ComplexMatrix operator*(const ComplexMatrix& o) const;
    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix scaled(cxd s) const;

    ComplexMatrix adjoint() const;
    cxd trace() const;
    double max_abs() const;
    double frobenius_norm() const;

    // max |A - B| over entries; dimension mismatch throws
    double max_abs_diff(const ComplexMatrix& o) const;

    bool is_hermitian(double tol) const;
    bool is_psd(double tol) const;
    // Hermitian, idempotent; rank is not constrained here
    bool is_projector(double tol) const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cxd> a_;
};

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// rho acts on C^{dA} (x) C^{dB}; dA must divide rho's dimension
ComplexMatrix partial_trace_a(const ComplexMatrix& rho, std::size_t da);
ComplexMatrix partial_trace_b(const ComplexMatrix& rho, std::size_t db);

// Tr(a b) without forming the product.
cxd trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigenDecomposition {
    std::vector<double> values;   // descending
    ComplexMatrix vectors;        // orthonormal columns, vectors.col(i) <-> values[i]
};

// Cyclic Jacobi for complex Hermitian matrices. Residual ||H V - V diag(l)||
// stays below ~1e-12 * ||H|| at these sizes; throws on non-Hermitian input.
EigenDecomposition hermitian_eig(const ComplexMatrix& h, double herm_tol = 1e-9);

// V f(diag) V^dagger applied to the spectrum of a Hermitian matrix
ComplexMatrix hermitian_function(const ComplexMatrix& h,
                                 const std::function<double(double)>& f);

ComplexMatrix outer_product(const std::vector<cxd>& u, const std::vector<cxd>& v);

}  // namespace anticert
