#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"
#include "opsys/feasibility.hpp"
#include "opsys/kron.hpp"
#include "opsys/operator_system.hpp"
#include "opsys/rng.hpp"

namespace opsys {

/// Linear map between matrix subsystems, given by the images of the domain's
/// user basis. Adjoint-compatible by validation: phi(b*) = phi(b)* wherever
/// both sides are determined by the basis data.
class CpMap {
public:
    CpMap(SystemPtr domain, std::size_t codomain_ambient, std::vector<ComplexMatrix> images,
          SystemPtr codomain_restriction = nullptr)
        : domain_(std::move(domain)),
          codomain_ambient_(codomain_ambient),
          images_(std::move(images)),
          codomain_(std::move(codomain_restriction)) {
        if (images_.size() != domain_->dim())
            throw input_error("map needs one image per basis element");
        for (const auto& m : images_) {
            if (m.rows() != codomain_ambient_ || m.cols() != codomain_ambient_)
                throw input_error("image has wrong codomain dimension");
            if (!m.all_finite()) throw input_error("non-finite entry in image");
        }
        double scale = 1.0;
        for (const auto& m : images_) scale = std::max(scale, m.frobenius_norm());
        for (std::size_t i = 0; i < domain_->dim(); ++i) {
            const auto adj_img = apply(domain_->basis()[i].adjoint());
            if ((adj_img - images_[i].adjoint()).max_abs() > 1e-10 * scale)
                throw input_error("map is not adjoint-compatible");
        }
        if (codomain_) {
            if (codomain_->ambient() != codomain_ambient_)
                throw input_error("codomain restriction ambient mismatch");
            for (const auto& m : images_)
                if (!codomain_->contains(m))
                    throw input_error("image escapes the codomain restriction");
        }
    }

    const SystemPtr& domain() const { return domain_; }
    std::size_t codomain_ambient() const { return codomain_ambient_; }
    const std::vector<ComplexMatrix>& images() const { return images_; }
    const SystemPtr& codomain_restriction() const { return codomain_; }

    ComplexMatrix apply(const ComplexMatrix& x) const {
        const auto c = domain_->coefficients(x);
        ComplexMatrix out(codomain_ambient_, codomain_ambient_);
        for (std::size_t j = 0; j < c.size(); ++j)
            if (c[j] != cplx(0.0, 0.0)) out += c[j] * images_[j];
        return out;
    }

    /// Amplification phi^{(n)} applied blockwise to a representation in
    /// M_n (x) M_p, producing M_n (x) M_q.
    ComplexMatrix apply_level(const ComplexMatrix& rep, std::size_t n) const {
        const std::size_t p = domain_->ambient();
        const std::size_t q = codomain_ambient_;
        ComplexMatrix out(n * q, n * q);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ComplexMatrix b(p, p);
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t c = 0; c < p; ++c) b(a, c) = rep(i * p + a, j * p + c);
                const auto img = apply(b);
                for (std::size_t a = 0; a < q; ++a)
                    for (std::size_t c = 0; c < q; ++c) out(i * q + a, j * q + c) = img(a, c);
            }
        return out;
    }

    SystemElement apply_element(const SystemElement& x) const {
        return SystemElement(codomain_ ? codomain_ : full_matrix_system(codomain_ambient_),
                             x.level(), apply_level(x.rep(), x.level()));
    }

private:
    SystemPtr domain_;
    std::size_t codomain_ambient_;
    std::vector<ComplexMatrix> images_;
    SystemPtr codomain_;
};

/// Schur multiplier x -> c .* x on M_p as a CpMap.
inline CpMap schur_multiplier(const ComplexMatrix& coeff) {
    const std::size_t p = coeff.rows();
    auto dom = full_matrix_system(p);
    std::vector<ComplexMatrix> images;
    for (auto [i, j] : Graph::complete(p).pairs()) {
        ComplexMatrix m(p, p);
        m(i, j) = coeff(i, j);
        images.push_back(m);
    }
    return CpMap(std::move(dom), p, std::move(images));
}

inline CpMap transpose_map(std::size_t p) {
    std::vector<ComplexMatrix> images;
    for (auto [i, j] : Graph::complete(p).pairs())
        images.push_back(ComplexMatrix::unit(p, p, j, i));
    return CpMap(full_matrix_system(p), p, std::move(images));
}

inline CpMap identity_map(const SystemPtr& s) {
    return CpMap(s, s->ambient(), s->basis());
}

/// Kraus-built map x -> sum_r K_r x K_r*, restricted to a subsystem domain.
inline CpMap kraus_map(const SystemPtr& domain, const std::vector<ComplexMatrix>& kraus) {
    if (kraus.empty()) throw input_error("kraus_map: need at least one operator");
    const std::size_t q = kraus[0].rows();
    std::vector<ComplexMatrix> images;
    for (const auto& b : domain->basis()) {
        ComplexMatrix img(q, q);
        for (const auto& k : kraus) img += k * (b * k.adjoint());
        images.push_back(img);
    }
    return CpMap(domain, q, std::move(images));
}

/// Choi matrix sum_{i,j} E_{i,j} (x) phi(E_{i,j}) of a map on a full matrix
/// algebra. The map is CP exactly when this is PSD.
inline HermitianMatrix choi_matrix(const CpMap& phi) {
    const std::size_t p = phi.domain()->ambient();
    if (!phi.domain()->is_full_matrix_algebra())
        throw input_error("use cp_extension for subsystems");
    ComplexMatrix w(p * phi.codomain_ambient(), p * phi.codomain_ambient());
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            w += kron(ComplexMatrix::unit(p, p, i, j), phi.apply(ComplexMatrix::unit(p, p, i, j)));
    HermitianMatrix h(w);
    if (h.symmetrization_residual() > 1e-9 * (1.0 + w.max_abs()))
        throw internal_error("choi matrix is not hermitian");
    return h;
}

enum class CpStatus { cp, undecided };

struct CpExtensionOutcome {
    CpStatus status = CpStatus::undecided;
    HermitianMatrix extension_choi;  // Choi matrix in M_p (x) M_q of a full-algebra extension
    double constraint_violation = 0.0;
    double psd_shortfall = 0.0;
    std::size_t iterations = 0;
};

/// Searches for a completely positive extension of phi to the full ambient
/// algebra: a PSD Choi matrix W whose action reproduces phi on the domain
/// span. Finding one certifies phi completely positive; undecided carries the
/// Dykstra diagnostics. Codomains are full matrix algebras here, which is what
/// makes a "yes" exact.
inline CpExtensionOutcome cp_extension(const CpMap& phi, double tol, std::size_t max_iter) {
    const std::size_t p = phi.domain()->ambient();
    const std::size_t q = phi.codomain_ambient();

    FeasibilityProblem prob;
    prob.dim = p * q;
    // constraints over the orthonormal internal basis keep the system well
    // conditioned: <conj(o_k) (x) E_{rs}, W> = phi(o_k)_{rs}
    for (const auto& o : phi.domain()->ortho().ortho) {
        const ComplexMatrix img = phi.apply(o);
        const ComplexMatrix oc = o.conj();
        for (std::size_t r = 0; r < q; ++r)
            for (std::size_t s = 0; s < q; ++s) {
                const ComplexMatrix f = kron(oc, ComplexMatrix::unit(q, q, r, s));
                const cplx target = img(r, s);
                const ComplexMatrix h1 = (f + f.adjoint()) * cplx(0.5, 0.0);
                const ComplexMatrix h2 = (f - f.adjoint()) * cplx(0.0, -0.5);
                prob.add(HermitianMatrix(h1), target.real());
                prob.add(HermitianMatrix(h2), -target.imag());
            }
    }

    const auto dy = dykstra_feasible(prob, tol, max_iter);
    CpExtensionOutcome out;
    out.extension_choi = dy.point;
    out.constraint_violation = dy.constraint_violation;
    out.psd_shortfall = dy.psd_shortfall;
    out.iterations = dy.iterations;
    out.status = dy.status == FeasibilityStatus::feasible ? CpStatus::cp : CpStatus::undecided;
    return out;
}

struct KPositivityOutcome {
    bool violation_found = false;
    std::optional<SystemElement> witness;  // Z in M_k(S)^+ with phi^(k)(Z) not PSD
    double witness_value = 0.0;            // bottom eigenvalue of phi^(k)(Z)
};

namespace detail {

/// Real-orthonormal basis of the Hermitian part of M_k(S), from the complex
/// orthonormal basis of M_k(S).
inline std::vector<ComplexMatrix> hermitian_basis_of_level(const SystemPtr& s, std::size_t k) {
    auto lvl = level_system(s, k);
    std::vector<ComplexMatrix> cand;
    for (const auto& o : lvl->ortho().ortho) {
        cand.push_back((o + o.adjoint()) * cplx(0.5, 0.0));
        cand.push_back((o - o.adjoint()) * cplx(0.0, -0.5));
    }
    // real-linear Gram-Schmidt under the (real) HS inner product
    std::vector<ComplexMatrix> out;
    for (auto v : cand) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& h : out) {
                const double ip = hs_inner(h, v).real();
                v -= cplx(ip, 0.0) * h;
            }
        const double nn = v.frobenius_norm();
        if (nn > 1e-8) {
            v *= cplx(1.0 / nn, 0.0);
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace detail

/// Randomized search for a k-positivity violation: alternate a projected
/// subgradient step on tr-one positive Z in M_k(S) against updates of the test
/// vector to the bottom eigenvector of phi^(k)(Z). A violation comes back with
/// a verified witness. Finding nothing proves nothing; pair with cp_extension
/// for two-sided answers into matrix algebras.
inline KPositivityOutcome k_positivity_probe(const CpMap& phi, std::size_t k, std::size_t trials,
                                             std::uint64_t seed, double tol) {
    if (k < 1) throw input_error("k_positivity_probe: k must be at least 1");
    const auto& s = phi.domain();
    const std::size_t kd = k * s->ambient();

    const auto herm_basis = detail::hermitian_basis_of_level(s, k);
    std::vector<ComplexMatrix> herm_images;
    for (const auto& h : herm_basis) herm_images.push_back(phi.apply_level(h, k));

    auto to_matrix = [&](const std::vector<double>& z) {
        ComplexMatrix m(kd, kd);
        for (std::size_t i = 0; i < z.size(); ++i)
            if (z[i] != 0.0) m += cplx(z[i], 0.0) * herm_basis[i];
        return m;
    };
    auto to_coords = [&](const ComplexMatrix& m) {
        std::vector<double> z(herm_basis.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = hs_inner(herm_basis[i], m).real();
        return z;
    };
    // projection onto {Z in span, Z >= 0, tr Z = 1} by alternating rounds
    auto project_feasible = [&](std::vector<double> z) {
        for (int round = 0; round < 80; ++round) {
            ComplexMatrix m = to_matrix(z);
            const double tr = m.trace().real();
            for (std::size_t i = 0; i < kd; ++i) m(i, i) += (1.0 - tr) / double(kd);
            const auto clipped = psd_clip(HermitianMatrix(m));
            const double gap = (clipped.matrix() - m).frobenius_norm();
            z = to_coords(clipped.matrix());
            if (gap < 1e-13 && std::abs(tr - 1.0) < 1e-13) break;
        }
        ComplexMatrix m = to_matrix(z);
        const double tr = m.trace().real();
        if (tr > 1e-8) {
            for (auto& v : z) v /= tr;
        }
        return z;
    };

    KPositivityOutcome out;
    for (std::uint64_t t = 0; t < trials; ++t) {
        auto rng = Rng::derive(seed, t);
        std::vector<double> z(herm_basis.size());
        for (auto& v : z) v = rng.gaussian();
        z = project_feasible(z);

        for (int iter = 0; iter < 80; ++iter) {
            ComplexMatrix zm = to_matrix(z);
            const ComplexMatrix img = phi.apply_level(zm, k);
            const auto eig = herm_eig(HermitianMatrix(img));
            const double lam = eig.eigenvalues.front();
            if (lam < -tol * (1.0 + img.frobenius_norm())) {
                // polish the candidate inside the feasible set, then verify the
                // claim from scratch
                const auto zpol = project_feasible(z);
                const ComplexMatrix zcand = to_matrix(zpol);
                SystemElement witness(s, k, zcand);
                const auto wpos = level_positive(witness, tol);
                const auto wimg = is_psd(HermitianMatrix(phi.apply_level(zcand, k)), tol);
                if (wpos.positive && !wimg.positive) {
                    out.violation_found = true;
                    out.witness = witness;
                    out.witness_value = wimg.lambda_min;
                    return out;
                }
            }
            // linear objective <phi^(k)(Z) v, v> for the current bottom vector
            std::vector<cplx> v(img.rows());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = eig.eigenvectors(i, 0);
            std::vector<double> grad(herm_basis.size());
            for (std::size_t b = 0; b < herm_basis.size(); ++b) {
                cplx acc = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    for (std::size_t j = 0; j < v.size(); ++j)
                        acc += std::conj(v[i]) * herm_images[b](i, j) * v[j];
                grad[b] = acc.real();
            }
            const double step = 0.8 / (1.0 + 0.15 * iter);
            for (std::size_t b = 0; b < z.size(); ++b) z[b] -= step * grad[b];
            z = project_feasible(z);
        }
    }
    return out;
}

struct TildePair {
    CpMap gamma;        // x -> (gamma_{i,j}(x)) into M_n(ambient)
    CpMap gamma_tilde;  // (x_{i,j}) -> (gamma_{i,j}(x_{i,j}))
    ComplexMatrix compression;  // V with V e_j = e_j (x) e_j
};

/// Structural system equality: same ambient and identical basis matrices.
inline bool same_system(const SystemPtr& a, const SystemPtr& b) {
    if (a == b) return true;
    if (a->ambient() != b->ambient() || a->dim() != b->dim()) return false;
    for (std::size_t k = 0; k < a->dim(); ++k)
        if (!(a->basis()[k] == b->basis()[k])) return false;
    return true;
}

/// Builds Gamma and its entrywise companion from an n x n family of maps with
/// a common domain, along with the compression V realizing
/// GammaTilde = (V* (x) id) Gamma^{(n)} (V (x) id).
inline TildePair tilde_map(const std::vector<std::vector<CpMap>>& family) {
    const std::size_t n = family.size();
    if (n == 0) throw input_error("tilde_map: empty family");
    const auto& dom = family[0][0].domain();
    const std::size_t q = family[0][0].codomain_ambient();
    for (const auto& row : family) {
        if (row.size() != n) throw input_error("tilde_map: family must be square");
        for (const auto& g : row) {
            if (!same_system(g.domain(), dom)) throw input_error("tilde_map: mismatched domains");
            if (g.codomain_ambient() != q) throw input_error("tilde_map: mismatched codomains");
        }
    }

    std::vector<ComplexMatrix> gamma_images;
    for (const auto& b : dom->basis()) {
        ComplexMatrix img(n * q, n * q);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const auto gij = family[i][j].apply(b);
                for (std::size_t a = 0; a < q; ++a)
                    for (std::size_t c = 0; c < q; ++c) img(i * q + a, j * q + c) = gij(a, c);
            }
        gamma_images.push_back(img);
    }
    CpMap gamma(dom, n * q, std::move(gamma_images));

    auto lvl = level_system(dom, n);
    std::vector<ComplexMatrix> tilde_images;
    for (const auto& b : lvl->basis()) {
        // basis order of level_system is E_{i,j} (x) b_k
        ComplexMatrix img(n * q, n * q);
        const std::size_t p = dom->ambient();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ComplexMatrix blk(p, p);
                for (std::size_t a = 0; a < p; ++a)
                    for (std::size_t c = 0; c < p; ++c) blk(a, c) = b(i * p + a, j * p + c);
                const auto gij = family[i][j].apply(blk);
                for (std::size_t a = 0; a < q; ++a)
                    for (std::size_t c = 0; c < q; ++c) img(i * q + a, j * q + c) = gij(a, c);
            }
        tilde_images.push_back(img);
    }
    CpMap gamma_tilde(lvl, n * q, std::move(tilde_images));

    ComplexMatrix v(n * n, n);
    for (std::size_t j = 0; j < n; ++j) v(j * n + j, j) = 1.0;
    return {std::move(gamma), std::move(gamma_tilde), std::move(v)};
}

}  // namespace opsys
