#pragma once

#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"

namespace opsys {

/// Hilbert-Schmidt orthonormal basis of a matrix span, together with the
/// expansion of each orthonormal element in the original (user) basis:
/// ortho[k] = sum_j coeff[k][j] * user[j].
struct OrthoBasis {
    std::vector<ComplexMatrix> ortho;
    std::vector<std::vector<cplx>> coeff;
    std::size_t input_size = 0;
    std::vector<std::size_t> pivot_order;
};

/// Gram-Schmidt with greedy column pivoting and one re-orthogonalization pass.
/// Elements whose residual drops below rel_tol * (1 + own norm) are treated as
/// dependent and skipped. rank = ortho.size().
inline OrthoBasis gram_schmidt(const std::vector<ComplexMatrix>& basis, double rel_tol = 1e-10) {
    OrthoBasis ob;
    ob.input_size = basis.size();
    if (basis.empty()) return ob;

    std::vector<ComplexMatrix> work = basis;
    std::vector<std::vector<cplx>> wcoeff(basis.size(), std::vector<cplx>(basis.size(), 0.0));
    for (std::size_t i = 0; i < basis.size(); ++i) wcoeff[i][i] = 1.0;
    std::vector<bool> used(basis.size(), false);

    for (std::size_t step = 0; step < basis.size(); ++step) {
        // pivot: largest remaining residual norm, lowest index on ties
        std::size_t best = basis.size();
        double best_norm = -1.0;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (used[i]) continue;
            const double n = work[i].frobenius_norm();
            if (n > best_norm + 1e-300) {
                best_norm = n;
                best = i;
            }
        }
        if (best == basis.size()) break;
        used[best] = true;
        const double cutoff = rel_tol * (1.0 + basis[best].frobenius_norm());
        if (best_norm <= cutoff) break;  // all remaining are dependent

        ComplexMatrix v = work[best];
        std::vector<cplx> c = wcoeff[best];
        // re-orthogonalize once against the accepted set
        for (int pass = 0; pass < 1; ++pass) {
            for (std::size_t k = 0; k < ob.ortho.size(); ++k) {
                const cplx ip = hs_inner(ob.ortho[k], v);
                if (ip == cplx(0.0, 0.0)) continue;
                v -= ip * ob.ortho[k];
                for (std::size_t j = 0; j < basis.size(); ++j) c[j] -= ip * ob.coeff[k][j];
            }
        }
        const double nn = v.frobenius_norm();
        if (nn <= cutoff) continue;  // dependent after re-orthogonalization
        v *= cplx(1.0 / nn, 0.0);
        for (auto& z : c) z /= nn;
        ob.ortho.push_back(std::move(v));
        ob.coeff.push_back(std::move(c));
        ob.pivot_order.push_back(best);

        // deflate the rest
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (used[i]) continue;
            const cplx ip = hs_inner(ob.ortho.back(), work[i]);
            if (ip == cplx(0.0, 0.0)) continue;
            work[i] -= ip * ob.ortho.back();
            for (std::size_t j = 0; j < basis.size(); ++j)
                wcoeff[i][j] -= ip * ob.coeff.back()[j];
        }
    }
    return ob;
}

struct Projection {
    ComplexMatrix projection;
    double residual;
};

/// Orthogonal projection of A onto span(basis) in the Hilbert-Schmidt inner
/// product. Empty basis projects to zero with residual ||A||_F.
inline Projection subspace_project(const ComplexMatrix& a, const std::vector<ComplexMatrix>& basis) {
    for (const auto& b : basis)
        if (b.rows() != a.rows() || b.cols() != a.cols())
            throw input_error("subspace_project: basis shape mismatch");
    if (basis.empty()) return {ComplexMatrix(a.rows(), a.cols()), a.frobenius_norm()};
    const OrthoBasis ob = gram_schmidt(basis);
    ComplexMatrix proj(a.rows(), a.cols());
    for (const auto& o : ob.ortho) proj += hs_inner(o, a) * o;
    return {proj, (a - proj).frobenius_norm()};
}

/// Projection against an already-orthonormalized basis.
inline Projection project_ortho(const ComplexMatrix& a, const std::vector<ComplexMatrix>& ortho) {
    ComplexMatrix proj(a.rows(), a.cols());
    for (const auto& o : ortho) proj += hs_inner(o, a) * o;
    return {proj, (a - proj).frobenius_norm()};
}

/// Coefficients of A in the user basis underlying `ob`, assuming A lies in the
/// span: A = sum_j out[j] * user[j].
inline std::vector<cplx> coefficients_in_user_basis(const ComplexMatrix& a, const OrthoBasis& ob) {
    std::vector<cplx> out(ob.input_size, 0.0);
    for (std::size_t k = 0; k < ob.ortho.size(); ++k) {
        const cplx g = hs_inner(ob.ortho[k], a);
        for (std::size_t j = 0; j < ob.input_size; ++j) out[j] += g * ob.coeff[k][j];
    }
    return out;
}

}  // namespace opsys
