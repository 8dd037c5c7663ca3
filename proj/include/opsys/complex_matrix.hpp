#pragma once

#include <complex>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsys {

using cplx = std::complex<double>;

/// Raised for malformed user input (bad JSON, violated preconditions on data).
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an internal consistency check fails; indicates a bug, not bad input.
class internal_error : public std::runtime_error {
public:
    explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

/// Dense complex matrix, row-major storage.
class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, cplx(0.0, 0.0)) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Matrix unit E_{i,j} (0-based) in the rows x cols rectangle.
    static ComplexMatrix unit(std::size_t rows, std::size_t cols, std::size_t i, std::size_t j) {
        ComplexMatrix m(rows, cols);
        m(i, j) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    const std::vector<cplx>& entries() const { return entries_; }
    std::vector<cplx>& entries() { return entries_; }

    bool all_finite() const {
        for (const auto& z : entries_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    ComplexMatrix conj() const {
        ComplexMatrix m(rows_, cols_);
        for (std::size_t k = 0; k < entries_.size(); ++k) m.entries_[k] = std::conj(entries_[k]);
        return m;
    }

    cplx trace() const {
        if (!square()) throw internal_error("trace of non-square matrix");
        cplx t = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : entries_) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : entries_) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cplx a) {
        for (auto& z : entries_) z *= a;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx a, ComplexMatrix m) { return m *= a; }
    friend ComplexMatrix operator*(ComplexMatrix m, cplx a) { return m *= a; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw internal_error("matrix product shape mismatch");
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

private:
    void check_same_shape(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw internal_error("matrix shape mismatch");
    }

    std::size_t rows_, cols_;
    std::vector<cplx> entries_;
};

/// Hilbert-Schmidt inner product trace(A* B).
inline cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw internal_error("hs_inner shape mismatch");
    cplx s = 0.0;
    const auto& ae = a.entries();
    const auto& be = b.entries();
    for (std::size_t k = 0; k < ae.size(); ++k) s += std::conj(ae[k]) * be[k];
    return s;
}

/// Self-adjoint square matrix. The constructor symmetrizes via (A + A*)/2 and
/// records how far the input was from being exactly self-adjoint.
class HermitianMatrix {
public:
    HermitianMatrix() : dim_(0), residual_(0.0) {}

    explicit HermitianMatrix(const ComplexMatrix& a) : dim_(a.rows()) {
        if (!a.square()) throw input_error("hermitian matrix must be square");
        if (!a.all_finite()) throw input_error("non-finite entry in matrix");
        mat_ = ComplexMatrix(dim_, dim_);
        residual_ = 0.0;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) {
                const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
                residual_ = std::max(residual_, std::abs(a(i, j) - std::conj(a(j, i))));
                mat_(i, j) = v;
            }
    }

    std::size_t dim() const { return dim_; }
    const ComplexMatrix& matrix() const { return mat_; }
    double symmetrization_residual() const { return residual_; }

    cplx operator()(std::size_t i, std::size_t j) const { return mat_(i, j); }
    double frobenius_norm() const { return mat_.frobenius_norm(); }

    static HermitianMatrix identity(std::size_t n) {
        return HermitianMatrix(ComplexMatrix::identity(n));
    }

private:
    std::size_t dim_;
    ComplexMatrix mat_;
    double residual_;
};

}  // namespace opsys
