#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"
#include "opsys/graph.hpp"
#include "opsys/schur.hpp"

namespace opsys {

/// Partially specified block matrix: q x q blocks sit on the pattern pairs,
/// everything off the pattern is structurally absent (a completion variable,
/// not a zero).
class PartialBlockMatrix {
public:
    PartialBlockMatrix(Graph pattern, std::size_t q,
                       const std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix>& blocks)
        : pattern_(std::move(pattern)), q_(q) {
        const std::size_t n = pattern_.vertices();
        for (const auto& [key, b] : blocks) {
            auto [i, j] = key;
            if (i >= n || j >= n || !pattern_.adjacent(i, j))
                throw input_error("block off the pattern");
            if (b.rows() != q_ || b.cols() != q_) throw input_error("block size mismatch");
            if (!b.all_finite()) throw input_error("non-finite entry in block");
        }
        // every pattern pair must be present, via the stated block or the
        // adjoint of its mirror
        for (auto [i, j] : pattern_.pairs()) {
            auto it = blocks.find({i, j});
            auto mirror = blocks.find({j, i});
            if (it == blocks.end() && mirror == blocks.end())
                throw input_error("missing block for pattern pair");
            ComplexMatrix b = it != blocks.end() ? it->second : mirror->second.adjoint();
            if (it != blocks.end() && mirror != blocks.end()) {
                if ((it->second - mirror->second.adjoint()).max_abs() > 1e-12)
                    throw input_error("blocks violate hermitian pattern symmetry");
            }
            if (i == j && (b - b.adjoint()).max_abs() > 1e-12)
                throw input_error("diagonal block not hermitian");
            blocks_[{i, j}] = std::move(b);
        }
        // exact symmetrization so specified data round-trips bit-for-bit
        for (auto [i, j] : pattern_.pairs()) {
            if (i < j) blocks_[{j, i}] = blocks_[{i, j}].adjoint();
            if (i == j) {
                ComplexMatrix d = blocks_[{i, i}];
                blocks_[{i, i}] = ComplexMatrix(HermitianMatrix(d).matrix());
            }
        }
    }

    const Graph& pattern() const { return pattern_; }
    std::size_t block_size() const { return q_; }
    const ComplexMatrix& block(std::size_t i, std::size_t j) const { return blocks_.at({i, j}); }

private:
    Graph pattern_;
    std::size_t q_;
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks_;
};

struct CliqueSummand {
    std::vector<std::size_t> clique;
    HermitianMatrix summand;
};

namespace detail {

inline ComplexMatrix block_of(const ComplexMatrix& m, std::size_t q, std::size_t i,
                              std::size_t j) {
    ComplexMatrix b(q, q);
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t c = 0; c < q; ++c) b(a, c) = m(i * q + a, j * q + c);
    return b;
}

inline void set_block(ComplexMatrix& m, std::size_t q, std::size_t i, std::size_t j,
                      const ComplexMatrix& b) {
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t c = 0; c < q; ++c) m(i * q + a, j * q + c) = b(a, c);
}

}  // namespace detail

/// Clique-supported decomposition of a patterned strictly positive matrix:
/// iterated pivot elimination along the perfect elimination ordering. Each
/// eliminated vertex contributes one summand supported exactly on the clique
/// formed by the vertex and its later neighbors; the summands add up to
/// X + eps * I.
inline std::vector<CliqueSummand> chordal_decompose(const HermitianMatrix& x, const Graph& pattern,
                                                    const EliminationOrdering& peo, double eps) {
    const std::size_t n = pattern.vertices();
    if (n == 0) throw input_error("empty matrix");
    if (x.dim() % n != 0) throw input_error("matrix dimension not a multiple of the pattern size");
    const std::size_t q = x.dim() / n;
    if (eps < 0.0) throw input_error("eps must be nonnegative");
    auto chk = check_peo(pattern, peo.ordering);
    if (!chk.valid) throw input_error("pattern not chordal");

    // validate and exactly zero the off-pattern blocks
    ComplexMatrix m = x.matrix();
    const double scale = 1.0 + x.frobenius_norm();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (pattern.adjacent(i, j)) continue;
            if (detail::block_of(m, q, i, j).frobenius_norm() > 1e-10 * scale)
                throw input_error("matrix not supported on the pattern");
            detail::set_block(m, q, i, j, ComplexMatrix(q, q));
        }
    for (std::size_t k = 0; k < x.dim(); ++k) m(k, k) += eps;

    std::vector<std::size_t> pos(n);
    for (std::size_t k = 0; k < n; ++k) pos[peo.ordering[k]] = k;

    std::vector<CliqueSummand> out;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t v = peo.ordering[k];
        std::vector<std::size_t> later;
        for (std::size_t w = 0; w < n; ++w)
            if (w != v && pattern.adjacent(v, w) && pos[w] > k) later.push_back(w);

        std::vector<std::size_t> clique{v};
        clique.insert(clique.end(), later.begin(), later.end());
        std::sort(clique.begin(), clique.end());

        const ComplexMatrix a = detail::block_of(m, q, v, v);
        const ComplexMatrix ainv = pinv_clipped(HermitianMatrix(a), 1e-12);

        ComplexMatrix s(x.dim(), x.dim());
        detail::set_block(s, q, v, v, a);
        std::vector<ComplexMatrix> coupling(later.size());
        for (std::size_t t = 0; t < later.size(); ++t) {
            coupling[t] = detail::block_of(m, q, v, later[t]);
            detail::set_block(s, q, v, later[t], coupling[t]);
            detail::set_block(s, q, later[t], v, coupling[t].adjoint());
        }
        for (std::size_t t = 0; t < later.size(); ++t)
            for (std::size_t u = 0; u < later.size(); ++u) {
                const ComplexMatrix fill = coupling[t].adjoint() * (ainv * coupling[u]);
                detail::set_block(s, q, later[t], later[u], fill);
                detail::set_block(m, q, later[t], later[u],
                                  detail::block_of(m, q, later[t], later[u]) - fill);
            }
        // retire the eliminated vertex
        for (std::size_t w = 0; w < n; ++w) {
            detail::set_block(m, q, v, w, ComplexMatrix(q, q));
            detail::set_block(m, q, w, v, ComplexMatrix(q, q));
        }
        const HermitianMatrix hs((s + s.adjoint()) * cplx(0.5, 0.0));
        if (!is_psd(hs, 1e-9).positive)
            throw input_error("pivot not positive at this eps; increase eps");
        out.push_back({clique, hs});
    }
    return out;
}

/// PSD completion of a partially specified block matrix with a chordal pattern
/// ("partially positive" input: every maximal-clique principal submatrix PSD).
/// Missing blocks are filled along a clique-tree traversal by the Schur
/// formula B A^+ C; specified blocks are returned untouched.
inline HermitianMatrix psd_complete(const PartialBlockMatrix& p, double tol) {
    const Graph& g = p.pattern();
    const std::size_t n = g.vertices();
    const std::size_t q = p.block_size();
    auto verdict = is_chordal(g);
    if (!verdict.chordal) throw input_error("pattern not chordal");

    const auto tree = clique_tree(g, verdict.ordering);

    // partial positivity over maximal cliques
    for (const auto& c : tree.cliques) {
        ComplexMatrix sub(c.size() * q, c.size() * q);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j)
                detail::set_block(sub, q, i, j, p.block(c[i], c[j]));
        if (!is_psd(HermitianMatrix(sub), tol).positive) {
            std::string msg = "not partially positive; failing clique {";
            for (std::size_t i = 0; i < c.size(); ++i)
                msg += (i ? "," : "") + std::to_string(c[i]);
            throw input_error(msg + "}");
        }
    }

    ComplexMatrix m(n * q, n * q);
    std::vector<std::vector<bool>> filled(n, std::vector<bool>(n, false));
    for (auto [i, j] : g.pairs()) {
        detail::set_block(m, q, i, j, p.block(i, j));
        filled[i][j] = true;
    }

    std::vector<bool> assembled(n, false);
    for (auto v : tree.cliques[tree.visit_order[0]]) assembled[v] = true;
    for (std::size_t step = 1; step < tree.visit_order.size(); ++step) {
        const auto& c = tree.cliques[tree.visit_order[step]];
        std::vector<std::size_t> sep, fresh, old;
        for (auto v : c) (assembled[v] ? sep : fresh).push_back(v);
        for (std::size_t v = 0; v < n; ++v)
            if (assembled[v] && std::find(sep.begin(), sep.end(), v) == sep.end())
                old.push_back(v);

        ComplexMatrix sep_block(sep.size() * q, sep.size() * q);
        for (std::size_t i = 0; i < sep.size(); ++i)
            for (std::size_t j = 0; j < sep.size(); ++j)
                detail::set_block(sep_block, q, i, j, detail::block_of(m, q, sep[i], sep[j]));
        const ComplexMatrix sep_pinv =
            sep.empty() ? ComplexMatrix(0, 0) : pinv_clipped(HermitianMatrix(sep_block), 1e-12);

        for (auto u : old)
            for (auto w : fresh) {
                if (filled[u][w]) continue;  // pattern edge, keep the given data
                ComplexMatrix fill(q, q);
                if (!sep.empty()) {
                    ComplexMatrix row(q, sep.size() * q), col(sep.size() * q, q);
                    for (std::size_t s = 0; s < sep.size(); ++s) {
                        const auto bu = detail::block_of(m, q, u, sep[s]);
                        const auto bw = detail::block_of(m, q, sep[s], w);
                        for (std::size_t a = 0; a < q; ++a)
                            for (std::size_t b = 0; b < q; ++b) {
                                row(a, s * q + b) = bu(a, b);
                                col(s * q + a, b) = bw(a, b);
                            }
                    }
                    fill = row * (sep_pinv * col);
                }
                detail::set_block(m, q, u, w, fill);
                detail::set_block(m, q, w, u, fill.adjoint());
                filled[u][w] = filled[w][u] = true;
            }
        for (auto v : fresh) assembled[v] = true;
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!filled[i][j]) throw internal_error("psd_complete left a block unfilled");

    HermitianMatrix out(m);
    if (!is_psd(out, tol).positive)
        throw internal_error("psd_complete produced a non-PSD completion");
    // the matrix is exactly hermitian by construction, so symmetrization is the
    // identity and the specified blocks come back bit-for-bit
    for (auto [i, j] : g.pairs())
        if (!(detail::block_of(out.matrix(), q, i, j) == p.block(i, j)))
            throw internal_error("psd_complete perturbed a specified block");
    return out;
}

}  // namespace opsys
