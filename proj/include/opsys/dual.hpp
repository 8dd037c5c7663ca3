#pragma once

#include <utility>
#include <vector>

#include "opsys/cp_map.hpp"
#include "opsys/kron.hpp"
#include "opsys/operator_system.hpp"

namespace opsys {

/// Element of M_n(S^d): one n x n coefficient block per basis functional. The
/// functionals are the ones biorthogonal to the system's user basis, so the
/// associated map S -> M_n sends basis[k] to blocks[k].
class DualElement {
public:
    DualElement(SystemPtr system, std::size_t level, std::vector<ComplexMatrix> blocks)
        : system_(std::move(system)), level_(level), blocks_(std::move(blocks)) {
        if (blocks_.size() != system_->dim())
            throw input_error("dual element needs one block per basis functional");
        for (const auto& b : blocks_) {
            if (b.rows() != level_ || b.cols() != level_)
                throw input_error("dual coefficient block has wrong size");
            if (!b.all_finite()) throw input_error("non-finite entry in dual element");
        }
        // adjoint pairing consistency == the associated map is adjoint-preserving;
        // CpMap's validation enforces exactly that
        as_map();
    }

    const SystemPtr& system() const { return system_; }
    std::size_t level() const { return level_; }
    const std::vector<ComplexMatrix>& blocks() const { return blocks_; }

    /// The associated map F: S -> M_n with F(basis[k]) = blocks[k].
    CpMap as_map() const { return CpMap(system_, level_, blocks_); }

private:
    SystemPtr system_;
    std::size_t level_;
    std::vector<ComplexMatrix> blocks_;
};

struct DualVerdict {
    bool positive = false;
    // supporting evidence: either a CP-extension Choi matrix or a k-positivity witness
    std::optional<HermitianMatrix> extension_choi;
    std::optional<SystemElement> violation_witness;
};

/// Positivity in M_n(S^d): the associated map F : S -> M_n is completely
/// positive. Codomain M_n makes both directions certifiable: a PSD extension
/// Choi matrix says yes; a verified n-positivity violation says no (maps into
/// M_n are CP as soon as they are n-positive). Budgets grow until one side
/// certifies.
inline DualVerdict dual_matrix_positive(const DualElement& f, double tol,
                                        std::uint64_t seed = 42) {
    const CpMap phi = f.as_map();
    DualVerdict out;
    std::size_t cp_budget = 4000;
    std::size_t probe_trials = 4;
    for (int round = 0; round < 6; ++round) {
        const auto ext = cp_extension(phi, tol, cp_budget);
        if (ext.status == CpStatus::cp) {
            out.positive = true;
            out.extension_choi = ext.extension_choi;
            return out;
        }
        const auto probe =
            k_positivity_probe(phi, f.level(), probe_trials, seed + 1000 * round, tol);
        if (probe.violation_found) {
            out.positive = false;
            out.violation_witness = probe.witness;
            return out;
        }
        cp_budget *= 3;
        probe_trials *= 2;
    }
    throw internal_error("dual_matrix_positive: undecided within budget");
}

/// The path-3 dual in its concrete block-diagonal picture: images of the seven
/// basis functionals inside M_2 (+) M_2, embedded in M_4.
inline std::vector<ComplexMatrix> gamma_functional_images() {
    auto e = [](std::size_t i, std::size_t j) { return ComplexMatrix::unit(4, 4, i, j); };
    // basis order of path3_system(): (0,0),(0,1),(1,0),(1,1),(1,2),(2,1),(2,2)
    return {e(0, 0), e(0, 1), e(1, 0), e(1, 1) + e(2, 2), e(2, 3), e(3, 2), e(3, 3)};
}

/// The block-diagonal algebra M_2 (+) M_2 inside M_4.
inline SystemPtr m2_plus_m2_system() {
    std::vector<ComplexMatrix> basis;
    for (std::size_t blk = 0; blk < 2; ++blk)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                basis.push_back(ComplexMatrix::unit(4, 4, 2 * blk + i, 2 * blk + j));
    return make_system(std::move(basis), 4, "M2+M2");
}

/// The 7-dimensional image of the path-3 dual under the block-diagonal
/// embedding; a complete order copy of S(path3)^d.
inline SystemPtr gamma_dual_system() {
    return make_system(gamma_functional_images(), 4, "Gamma(S(path3)^d)");
}

inline bool is_path3_system(const SystemPtr& s) {
    if (s->ambient() != 3 || s->dim() != 7) return false;
    const auto ref = path3_system();
    for (std::size_t k = 0; k < 7; ++k)
        if (!(s->basis()[k] == ref->basis()[k])) return false;
    return true;
}

/// Entrywise block assembly of the path-3 dual representation at level n:
/// sum_k A_k (x) Gamma(f_k), an element of the block-diagonal subsystem of M_4.
/// Positive exactly when the dual element is.
inline SystemElement gamma_embed(const DualElement& f) {
    if (!is_path3_system(f.system()))
        throw input_error("gamma_embed: source must be the path-3 graph system dual");
    const auto imgs = gamma_functional_images();
    ComplexMatrix rep(4 * f.level(), 4 * f.level());
    for (std::size_t k = 0; k < imgs.size(); ++k) rep += kron(f.blocks()[k], imgs[k]);
    return SystemElement(m2_plus_m2_system(), f.level(), rep);
}

}  // namespace opsys
