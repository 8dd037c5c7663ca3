#pragma once

#include <algorithm>
#include <vector>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"

namespace opsys {

namespace detail {

/// One pivot step of the two-summand decomposition: with M = [[A,B],[B*,C]]
/// along (head, tail), S1 = [[A,B],[B*, B* Ainv B]] and S2 = M - S1, where Ainv
/// is the eigenvalue-clipped pseudo-inverse of the head block. Index sets refer
/// to positions in M; S1 and S2 come back embedded in the full dimension.
inline std::pair<ComplexMatrix, ComplexMatrix> schur_split_pinv(const ComplexMatrix& m,
                                                                const std::vector<std::size_t>& head,
                                                                double pinv_cutoff_rel) {
    const std::size_t n = m.rows();
    std::vector<bool> in_head(n, false);
    for (auto h : head) in_head[h] = true;
    std::vector<std::size_t> tail;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_head[i]) tail.push_back(i);

    const std::size_t hs = head.size(), ts = tail.size();
    ComplexMatrix a(hs, hs), b(hs, ts);
    for (std::size_t i = 0; i < hs; ++i) {
        for (std::size_t j = 0; j < hs; ++j) a(i, j) = m(head[i], head[j]);
        for (std::size_t j = 0; j < ts; ++j) b(i, j) = m(head[i], tail[j]);
    }
    const ComplexMatrix ainv = pinv_clipped(HermitianMatrix(a), pinv_cutoff_rel);
    const ComplexMatrix residual_block = b.adjoint() * (ainv * b);  // B* A^+ B

    ComplexMatrix s1(n, n);
    for (std::size_t i = 0; i < hs; ++i) {
        for (std::size_t j = 0; j < hs; ++j) s1(head[i], head[j]) = a(i, j);
        for (std::size_t j = 0; j < ts; ++j) {
            s1(head[i], tail[j]) = b(i, j);
            s1(tail[j], head[i]) = std::conj(b(i, j));
        }
    }
    for (std::size_t i = 0; i < ts; ++i)
        for (std::size_t j = 0; j < ts; ++j) s1(tail[i], tail[j]) = residual_block(i, j);

    ComplexMatrix s2(n, n);
    for (std::size_t i = 0; i < ts; ++i)
        for (std::size_t j = 0; j < ts; ++j)
            s2(tail[i], tail[j]) = m(tail[i], tail[j]) - residual_block(i, j);
    return {s1, s2};
}

}  // namespace detail

struct SchurSplit {
    HermitianMatrix s1;
    HermitianMatrix s2;
};

/// Two-summand decomposition of X + rI along the (head, tail) block structure:
/// S1 carries the head block, the coupling and its Schur compression, S2 the
/// pivot residual. S1 + S2 = X + rI to round-off; both are PSD whenever the
/// head block of X + rI is strictly positive.
inline SchurSplit schur_split(const HermitianMatrix& x, const std::vector<std::size_t>& head,
                              double r) {
    if (r < 0.0) throw input_error("schur_split: r must be nonnegative");
    const std::size_t n = x.dim();
    if (head.empty() || head.size() >= n) throw input_error("schur_split: head must be a proper nonempty subset");
    for (auto h : head)
        if (h >= n) throw input_error("schur_split: head index out of range");

    ComplexMatrix m = x.matrix();
    for (std::size_t i = 0; i < n; ++i) m(i, i) += r;

    ComplexMatrix a(head.size(), head.size());
    for (std::size_t i = 0; i < head.size(); ++i)
        for (std::size_t j = 0; j < head.size(); ++j) a(i, j) = m(head[i], head[j]);
    const auto head_eig = herm_eig(HermitianMatrix(a));
    const double lam_max = head_eig.eigenvalues.back();
    if (head_eig.eigenvalues.front() <= 1e-13 * std::max(1.0, lam_max))
        throw input_error("head block not strictly positive; increase r");

    auto [s1, s2] = detail::schur_split_pinv(m, head, 1e-14);
    return {HermitianMatrix(s1), HermitianMatrix(s2)};
}

}  // namespace opsys
