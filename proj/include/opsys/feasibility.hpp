#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"

namespace opsys {

/// Semidefinite feasibility data: find X PSD (dim x dim, Hermitian) with
/// <F_i, X> = b_i under the Hilbert-Schmidt pairing <F, X> = trace(F* X).
struct FeasibilityProblem {
    std::size_t dim = 0;
    std::vector<std::pair<HermitianMatrix, double>> constraints;

    void add(const HermitianMatrix& f, double b) {
        if (f.dim() != dim) throw input_error("constraint dimension mismatch");
        constraints.emplace_back(f, b);
    }
};

namespace detail {

/// Orthonormalized affine constraint system over the real vector space of
/// Hermitian matrices. Dependent constraints are folded away; a dependent
/// constraint whose target disagrees with the implied combination marks the
/// system inconsistent.
struct AffineSystem {
    std::size_t dim = 0;
    std::vector<ComplexMatrix> ortho;  // HS-orthonormal Hermitian matrices
    std::vector<double> target;       // <ortho_k, X> = target_k

    static AffineSystem build(const FeasibilityProblem& p, double tol) {
        AffineSystem s;
        s.dim = p.dim;
        double scale = 1.0;
        for (const auto& [f, b] : p.constraints)
            scale = std::max({scale, f.frobenius_norm(), std::abs(b)});
        for (const auto& [f, b] : p.constraints) {
            ComplexMatrix v = f.matrix();
            double t = b;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t k = 0; k < s.ortho.size(); ++k) {
                    const double ip = hs_inner(s.ortho[k], v).real();
                    if (ip == 0.0) continue;
                    v -= cplx(ip, 0.0) * s.ortho[k];
                    t -= ip * s.target[k];
                }
            }
            const double nn = v.frobenius_norm();
            if (nn <= 1e-12 * scale) {
                if (std::abs(t) > std::max(tol, 1e-9) * scale)
                    throw input_error("affine constraints inconsistent");
                continue;
            }
            v *= cplx(1.0 / nn, 0.0);
            s.ortho.push_back(std::move(v));
            s.target.push_back(t / nn);
        }
        return s;
    }

    /// Least-norm correction onto the affine set. Flat loops: this sits in the
    /// innermost Dykstra cycle.
    HermitianMatrix project(const HermitianMatrix& x) const {
        ComplexMatrix out = x.matrix();
        auto& oe = out.entries();
        for (std::size_t k = 0; k < ortho.size(); ++k) {
            const auto& ce = ortho[k].entries();
            double ip = 0.0;
            for (std::size_t m = 0; m < oe.size(); ++m)
                ip += ce[m].real() * oe[m].real() + ce[m].imag() * oe[m].imag();
            const double f = target[k] - ip;
            if (f == 0.0) continue;
            for (std::size_t m = 0; m < oe.size(); ++m) oe[m] += f * ce[m];
        }
        return HermitianMatrix(out);
    }

    double max_violation(const HermitianMatrix& x,
                         const FeasibilityProblem& p) const {
        double m = 0.0;
        for (const auto& [f, b] : p.constraints)
            m = std::max(m, std::abs(hs_inner(f.matrix(), x.matrix()).real() - b));
        return m;
    }
};

/// Face-restricted refinement: when the PSD iterate concentrates on a low
/// eigenspace U, solve the affine system by least squares over the tangent
/// space { U Z U* + U B V* + V B* U* } at that face (V spanning the
/// complement). The coupling block makes the residual quadratic in the face
/// error, which is what closes the gap when every feasible point is
/// rank-deficient and plain alternating projections slow to a crawl. The
/// candidate is handed back for honest re-validation by the caller.
inline std::optional<HermitianMatrix> face_polish(const AffineSystem& aff,
                                                  const HermitianMatrix& y, std::size_t rank) {
    const auto eig = herm_eig(y);
    const std::size_t n = y.dim();
    if (rank == 0 || rank >= n) return std::nullopt;
    // top-`rank` eigenvectors span the face
    std::vector<std::size_t> keep;
    for (std::size_t k = n - rank; k < n; ++k) keep.push_back(k);
    const std::size_t r = keep.size();

    // tangent-space basis, HS-orthonormal by block structure
    std::vector<ComplexMatrix> tangent;
    auto col = [&](std::size_t k) {
        ComplexMatrix v(n, 1);
        for (std::size_t i = 0; i < n; ++i) v(i, 0) = eig.eigenvectors(i, k);
        return v;
    };
    const double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a; b < r; ++b) {
            const auto ua = col(keep[a]), ub = col(keep[b]);
            if (a == b) {
                tangent.push_back(ua * ua.adjoint());
            } else {
                tangent.push_back((ua * ub.adjoint() + ub * ua.adjoint()) * cplx(inv_sqrt2, 0.0));
                tangent.push_back((ua * ub.adjoint() - ub * ua.adjoint()) * cplx(0.0, -inv_sqrt2));
            }
        }
        std::size_t kc = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (kc < keep.size() && keep[kc] == k) {
                ++kc;
                continue;
            }
            const auto ua = col(keep[a]), vk = col(k);
            tangent.push_back((ua * vk.adjoint() + vk * ua.adjoint()) * cplx(inv_sqrt2, 0.0));
            tangent.push_back((ua * vk.adjoint() - vk * ua.adjoint()) * cplx(0.0, -inv_sqrt2));
        }
    }

    // least-norm solve of the constraints restricted to tangent coordinates
    const std::size_t dim = tangent.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> target;
    for (std::size_t c = 0; c < aff.ortho.size(); ++c) {
        std::vector<double> row(dim);
        for (std::size_t m = 0; m < dim; ++m) row[m] = hs_inner(tangent[m], aff.ortho[c]).real();
        double t = aff.target[c];
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < rows.size(); ++k) {
                double ip = 0.0;
                for (std::size_t m = 0; m < dim; ++m) ip += rows[k][m] * row[m];
                for (std::size_t m = 0; m < dim; ++m) row[m] -= ip * rows[k][m];
                t -= ip * target[k];
            }
        double nn = 0.0;
        for (double v : row) nn += v * v;
        nn = std::sqrt(nn);
        if (nn <= 1e-11) continue;  // least squares: unreachable residual is dropped
        for (auto& v : row) v /= nn;
        rows.push_back(std::move(row));
        target.push_back(t / nn);
    }
    std::vector<double> w(dim, 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t m = 0; m < dim; ++m) w[m] += target[k] * rows[k][m];
    ComplexMatrix out(n, n);
    for (std::size_t m = 0; m < dim; ++m)
        if (w[m] != 0.0) out += cplx(w[m], 0.0) * tangent[m];
    return HermitianMatrix(out);
}

}  // namespace detail

enum class FeasibilityStatus { feasible, undecided };

struct DykstraOutcome {
    FeasibilityStatus status = FeasibilityStatus::undecided;
    HermitianMatrix point;          // feasible point, or best iterate
    double constraint_violation = 0.0;
    double psd_shortfall = 0.0;     // max(0, -lambda_min) at the reported point
    double affine_distance = 0.0;   // distance of the PSD iterate to the affine set
    double psd_distance = 0.0;      // distance of the affine iterate to the PSD cone
    std::size_t iterations = 0;
};

/// Dykstra's alternating projections between the affine constraint set and the
/// PSD cone, restarted from a few affine-feasible points (the least-norm
/// solution first, then seeded perturbations along the free directions; the
/// canonical start occasionally lands in a tangential basin that converges
/// only sublinearly). Declares feasibility only for an affine-exact iterate
/// that is PSD within tol, or a PSD-exact iterate meeting every constraint
/// within tol. Never certifies infeasibility: a "no" from this solver is only
/// ever the absence of a "yes".
inline DykstraOutcome dykstra_feasible(const FeasibilityProblem& problem, double tol,
                                       std::size_t max_iter) {
    if (tol <= 0.0) throw input_error("dykstra_feasible: tol must be positive");
    if (max_iter < 1) throw input_error("dykstra_feasible: max_iter must be at least 1");
    if (problem.dim == 0) throw input_error("empty matrix");

    const auto aff = detail::AffineSystem::build(problem, tol);

    const std::size_t n = problem.dim;
    const HermitianMatrix base = aff.project(HermitianMatrix(ComplexMatrix(n, n)));
    const double start_scale = 1.0 + base.frobenius_norm();

    DykstraOutcome out;
    double best_score = -1.0;

    const std::size_t restarts = 6;
    const std::size_t chunk = std::max<std::size_t>(500, max_iter / restarts);
    std::size_t used = 0;

    std::mt19937_64 start_gen(0x9e3779b97f4a7c15ULL);
    auto gaussian = [&start_gen]() {
        // Box-Muller over the raw stream, deterministic across platforms
        const double u1 = ((start_gen() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = ((start_gen() >> 11) + 1.0) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };

    for (std::size_t restart = 0; restart < restarts && used < max_iter; ++restart) {
        HermitianMatrix x = base;
        if (restart > 0) {
            ComplexMatrix r(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                r(i, i) = gaussian();
                for (std::size_t j = i + 1; j < n; ++j) {
                    r(i, j) = cplx(gaussian(), gaussian());
                    r(j, i) = std::conj(r(i, j));
                }
            }
            // keep only the free (homogeneous) directions of the affine set
            const ComplexMatrix free_part = aff.project(HermitianMatrix(r)).matrix() - base.matrix();
            const double fn = free_part.frobenius_norm();
            if (fn > 1e-12)
                x = HermitianMatrix(base.matrix() +
                                    cplx(0.4 * double(restart) * start_scale / fn, 0.0) * free_part);
        }
        ComplexMatrix p_corr(n, n);  // Dykstra correction for the PSD cone

    const std::size_t check_every = 10;
    const std::size_t budget = std::min(chunk, max_iter - used);
    for (std::size_t it = 1; it <= budget; ++it) {
        ++used;
        HermitianMatrix y = psd_clip(HermitianMatrix(x.matrix() + p_corr));
        p_corr = x.matrix() + p_corr - y.matrix();
        HermitianMatrix xa = aff.project(y);

        if (it % check_every == 0 || it == budget) {
            // affine-exact candidate
            const auto exa = herm_eig(xa);
            const double shortfall_a = std::max(0.0, -exa.eigenvalues.front());
            const double ok_a = tol * (1.0 + xa.frobenius_norm());
            // psd-exact candidate
            const double viol_y = aff.max_violation(y, problem);

            const double score = std::min(shortfall_a, viol_y);
            if (best_score < 0.0 || score < best_score) {
                best_score = score;
                out.point = shortfall_a <= viol_y ? xa : y;
                out.constraint_violation = aff.max_violation(out.point, problem);
                out.psd_shortfall =
                    std::max(0.0, -herm_eig(out.point).eigenvalues.front());
                out.affine_distance = (aff.project(y).matrix() - y.matrix()).frobenius_norm();
                out.psd_distance = (psd_clip(xa).matrix() - xa.matrix()).frobenius_norm();
            }
            if (shortfall_a <= ok_a) {
                out.status = FeasibilityStatus::feasible;
                out.point = xa;
                out.constraint_violation = aff.max_violation(xa, problem);
                out.psd_shortfall = shortfall_a;
                out.iterations = used;
                return out;
            }
            if (viol_y <= tol) {
                out.status = FeasibilityStatus::feasible;
                out.point = y;
                out.constraint_violation = viol_y;
                out.psd_shortfall = 0.0;
                out.iterations = used;
                return out;
            }
            const std::size_t polish_every = n <= 16 ? 50 : 200;
            if (it % polish_every == 0 && viol_y < 1e-3 * (1.0 + y.frobenius_norm())) {
                // fixed-rank face iterations around the iterate's numerical rank
                const auto ye = herm_eig(y);
                std::size_t r0 = 0;
                for (double lam : ye.eigenvalues)
                    if (lam > 1e-7 * std::max(1e-300, ye.eigenvalues.back())) ++r0;
                std::vector<std::size_t> ranks;
                const std::size_t spread = n <= 16 ? 2 : 1;
                for (std::size_t d = 0; d <= spread; ++d) {
                    if (r0 >= d + 1) ranks.push_back(r0 - d);
                    if (d > 0 && r0 + d < n) ranks.push_back(r0 + d);
                }
                const int polish_rounds = n <= 16 ? 30 : 10;
                for (const std::size_t r : ranks) {
                    HermitianMatrix cand = y;
                    double prev_short = 1e300;
                    for (int round = 0; round < polish_rounds; ++round) {
                        const auto next = detail::face_polish(aff, cand, r);
                        if (!next) break;
                        cand = *next;
                        const double cviol = aff.max_violation(cand, problem);
                        const double cshort = std::max(0.0, -herm_eig(cand).eigenvalues.front());
                        if (cviol <= tol && cshort <= tol * (1.0 + cand.frobenius_norm())) {
                            out.status = FeasibilityStatus::feasible;
                            out.point = cand;
                            out.constraint_violation = cviol;
                            out.psd_shortfall = cshort;
                            out.iterations = used;
                            return out;
                        }
                        if (cshort > 0.9 * prev_short) break;  // stalled or diverging
                        prev_short = cshort;
                    }
                }
            }
        }
        x = xa;
        out.iterations = used;
    }
    }
    out.status = FeasibilityStatus::undecided;
    return out;
}

}  // namespace opsys
