#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "opsys/complex_matrix.hpp"

namespace opsys {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // unitary, columns are eigenvectors
};

namespace detail {

inline double offdiag_mass(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

/// Hermitian eigendecomposition by cyclic Jacobi with threshold sweeps.
/// Deterministic: fixed (p,q) sweep order, termination when the off-diagonal
/// Frobenius mass drops below 1e-14 * ||A||_F, or after 100 sweeps.
inline EigenDecomposition herm_eig(const HermitianMatrix& h) {
    const std::size_t n = h.dim();
    if (n == 0) throw input_error("empty matrix");

    ComplexMatrix a = h.matrix();
    ComplexMatrix u = ComplexMatrix::identity(n);
    const double norm_a = a.frobenius_norm();
    const double term = 1e-14 * norm_a;

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (detail::offdiag_mass(a) <= term) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx b = a(p, q);
                const double ab = std::abs(b);
                if (ab <= 1e-300) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const cplx phase = b / ab;  // e^{i beta}
                // annihilation condition: |b| t^2 - (aqq - app) t - |b| = 0,
                // stable (small-magnitude) root
                const double tau = (aqq - app) / (2.0 * ab);
                double t;
                if (tau >= 0.0)
                    t = -1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = 1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // Columns: col p <- c*col p + s*conj(phase)*col q,
                //          col q <- -s*phase*col p + c*col q, then rows by adjoint.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp + s * std::conj(phase) * akq;
                    a(k, q) = -s * phase * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk + s * phase * aqk;
                    a(q, k) = -s * std::conj(phase) * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = cplx(a(p, p).real(), 0.0);
                a(q, q) = cplx(a(q, q).real(), 0.0);
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx ukp = u(k, p), ukq = u(k, q);
                    u(k, p) = c * ukp + s * std::conj(phase) * ukq;
                    u(k, q) = -s * phase * ukp + c * ukq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = u(i, order[j]);
    }
    return out;
}

struct PsdVerdict {
    bool positive;
    double lambda_min;
    std::vector<cplx> witness;  // unit vector with <Av,v> = lambda_min when not positive
};

/// PSD test with relative tolerance: positive iff lambda_min >= -tol*(1+||A||_F).
inline PsdVerdict is_psd(const HermitianMatrix& a, double tol) {
    if (tol < 0.0) throw input_error("is_psd: tol must be nonnegative");
    const auto eig = herm_eig(a);
    PsdVerdict v;
    v.lambda_min = eig.eigenvalues.front();
    v.positive = v.lambda_min >= -tol * (1.0 + a.frobenius_norm());
    if (!v.positive) {
        v.witness.resize(a.dim());
        for (std::size_t i = 0; i < a.dim(); ++i) v.witness[i] = eig.eigenvectors(i, 0);
    }
    return v;
}

/// Projection onto the PSD cone: clip negative eigenvalues.
inline HermitianMatrix psd_clip(const HermitianMatrix& a) {
    const auto eig = herm_eig(a);
    const std::size_t n = a.dim();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::max(eig.eigenvalues[k], 0.0);
        if (lam == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx uik = eig.eigenvectors(i, k);
            if (uik == cplx(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += lam * uik * std::conj(eig.eigenvectors(j, k));
        }
    }
    return HermitianMatrix(out);
}

/// Eigenvalue-clipped pseudo-inverse: eigenvalues below cutoff_rel * lambda_max
/// are treated as zero.
inline ComplexMatrix pinv_clipped(const HermitianMatrix& a, double cutoff_rel) {
    const auto eig = herm_eig(a);
    const std::size_t n = a.dim();
    double lam_max = 0.0;
    for (double l : eig.eigenvalues) lam_max = std::max(lam_max, std::abs(l));
    const double cutoff = cutoff_rel * lam_max;
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = eig.eigenvalues[k];
        if (std::abs(lam) <= cutoff || lam == 0.0) continue;
        const double w = 1.0 / lam;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx uik = eig.eigenvectors(i, k);
            if (uik == cplx(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += w * uik * std::conj(eig.eigenvectors(j, k));
        }
    }
    return out;
}

/// Largest singular value via the eigenvalues of M*M.
inline double operator_norm(const ComplexMatrix& m) {
    const ComplexMatrix g = m.adjoint() * m;
    const auto eig = herm_eig(HermitianMatrix(g));
    const double top = eig.eigenvalues.back();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

}  // namespace opsys
