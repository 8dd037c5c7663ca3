#pragma once

#include <numeric>
#include <vector>

#include "opsys/complex_matrix.hpp"

namespace opsys {

/// Kronecker product with the double-index convention
/// (A (x) B)_{(i,k),(j,l)} = A_{i,j} B_{k,l}, flattened row-major as
/// (i,k) -> i * rows(B) + k.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

/// Index map for a multi-axis flattening: axes listed outermost first.
/// flatten({i0,i1,...}) = ((i0*d1 + i1)*d2 + i2)*...
inline std::size_t flatten_index(const std::vector<std::size_t>& idx,
                                 const std::vector<std::size_t>& dims) {
    std::size_t f = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) f = f * dims[a] + idx[a];
    return f;
}

inline std::vector<std::size_t> unflatten_index(std::size_t f,
                                                const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t a = dims.size(); a-- > 0;) {
        idx[a] = f % dims[a];
        f /= dims[a];
    }
    return idx;
}

/// The permutation sending the flattening of axes `dims` to the flattening of
/// the permuted axes: target position of source index i is where the re-ordered
/// multi-index lands. perm[t] = source axis appearing at target slot t.
inline std::vector<std::size_t> axis_permutation(const std::vector<std::size_t>& dims,
                                                 const std::vector<std::size_t>& perm) {
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    std::vector<std::size_t> target_dims(perm.size());
    for (std::size_t t = 0; t < perm.size(); ++t) target_dims[t] = dims[perm[t]];
    std::vector<std::size_t> map(total);
    for (std::size_t f = 0; f < total; ++f) {
        const auto idx = unflatten_index(f, dims);
        std::vector<std::size_t> tidx(perm.size());
        for (std::size_t t = 0; t < perm.size(); ++t) tidx[t] = idx[perm[t]];
        map[f] = flatten_index(tidx, target_dims);
    }
    return map;
}

/// Explicit permutation matrix P with (P x)_{map[i]} = x_i.
inline ComplexMatrix permutation_matrix(const std::vector<std::size_t>& map) {
    ComplexMatrix p(map.size(), map.size());
    for (std::size_t i = 0; i < map.size(); ++i) p(map[i], i) = 1.0;
    return p;
}

/// Conjugate a square matrix by an axis permutation: rows and columns of M are
/// simultaneously re-indexed, M'_{map[i],map[j]} = M_{i,j}. Equals P M P*.
inline ComplexMatrix permute_axes(const ComplexMatrix& m, const std::vector<std::size_t>& dims,
                                  const std::vector<std::size_t>& perm) {
    const auto map = axis_permutation(dims, perm);
    if (m.rows() != map.size() || m.cols() != map.size())
        throw internal_error("permute_axes dimension mismatch");
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(map[i], map[j]) = m(i, j);
    return out;
}

}  // namespace opsys
