#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"
#include "opsys/graph.hpp"
#include "opsys/kron.hpp"
#include "opsys/subspace.hpp"

namespace opsys {

/// A concrete operator system: a unital, adjoint-closed subspace of M_p given
/// by a basis. The user's basis is kept for reporting and coefficient
/// conventions; an orthonormalized internal basis drives span computations.
class OperatorSystem {
public:
    static std::shared_ptr<const OperatorSystem> make(std::vector<ComplexMatrix> basis,
                                                      std::size_t ambient, std::string name) {
        auto sys = std::shared_ptr<OperatorSystem>(new OperatorSystem());
        sys->ambient_ = ambient;
        sys->name_ = std::move(name);
        for (const auto& b : basis) {
            if (b.rows() != ambient || b.cols() != ambient)
                throw input_error("basis element has wrong ambient dimension");
            if (!b.all_finite()) throw input_error("non-finite entry in basis");
        }
        sys->basis_ = std::move(basis);
        sys->ortho_ = gram_schmidt(sys->basis_);
        if (sys->ortho_.ortho.size() != sys->basis_.size())
            throw input_error("basis not independent");
        if (project_ortho(ComplexMatrix::identity(ambient), sys->ortho_.ortho).residual >
            1e-10 * (1.0 + std::sqrt(double(ambient))))
            throw input_error("unit missing");
        for (const auto& b : sys->basis_)
            if (project_ortho(b.adjoint(), sys->ortho_.ortho).residual >
                1e-10 * (1.0 + b.frobenius_norm()))
                throw input_error("not adjoint-closed");
        return sys;
    }

    std::size_t ambient() const { return ambient_; }
    std::size_t dim() const { return basis_.size(); }
    const std::string& name() const { return name_; }
    const std::vector<ComplexMatrix>& basis() const { return basis_; }
    const OrthoBasis& ortho() const { return ortho_; }

    bool contains(const ComplexMatrix& a, double tol = 1e-9) const {
        return project_ortho(a, ortho_.ortho).residual <= tol * (1.0 + a.frobenius_norm());
    }

    /// Coefficients in the user basis (valid for elements of the span).
    std::vector<cplx> coefficients(const ComplexMatrix& a) const {
        return coefficients_in_user_basis(a, ortho_);
    }

    /// True when the span is closed under multiplication, i.e. the system is a
    /// (unital *-)algebra represented on M_p.
    bool multiplicatively_closed(double tol = 1e-9) const {
        for (const auto& a : basis_)
            for (const auto& b : basis_)
                if (!contains(a * b, tol)) return false;
        return true;
    }

    bool is_full_matrix_algebra() const { return dim() == ambient_ * ambient_; }

private:
    OperatorSystem() = default;
    std::size_t ambient_ = 0;
    std::string name_;
    std::vector<ComplexMatrix> basis_;
    OrthoBasis ortho_;
};

using SystemPtr = std::shared_ptr<const OperatorSystem>;

inline SystemPtr make_system(std::vector<ComplexMatrix> basis, std::size_t ambient,
                             std::string name) {
    return OperatorSystem::make(std::move(basis), ambient, std::move(name));
}

/// Graph operator system S(G) = span{ E_{i,j} : (i,j) in G }. Basis order is
/// the row-major pair order of G.
inline SystemPtr graph_system(const Graph& g, std::string name = "") {
    std::vector<ComplexMatrix> basis;
    for (auto [i, j] : g.pairs()) basis.push_back(ComplexMatrix::unit(g.vertices(), g.vertices(), i, j));
    if (name.empty()) name = "S(G" + std::to_string(g.vertices()) + ")";
    return make_system(std::move(basis), g.vertices(), std::move(name));
}

inline SystemPtr full_matrix_system(std::size_t p) {
    return graph_system(Graph::complete(p), "M" + std::to_string(p));
}

inline SystemPtr diagonal_system(std::size_t p) {
    return graph_system(Graph::loops_only(p), "D" + std::to_string(p));
}

inline SystemPtr path3_system() { return graph_system(Graph::path(3), "S(path3)"); }

/// The canonical operator system of an operator space spanned by p x q
/// rectangles: 2x2 block matrices with scalar diagonal corners.
inline SystemPtr paulsen_system(const std::vector<ComplexMatrix>& rect_basis) {
    if (rect_basis.empty()) throw input_error("paulsen_system: empty basis");
    const std::size_t p = rect_basis[0].rows(), q = rect_basis[0].cols();
    for (const auto& x : rect_basis)
        if (x.rows() != p || x.cols() != q) throw input_error("paulsen_system: shape mismatch");
    if (gram_schmidt(rect_basis).ortho.size() != rect_basis.size())
        throw input_error("paulsen_system: rect_basis not independent");

    const std::size_t n = p + q;
    std::vector<ComplexMatrix> basis;
    ComplexMatrix top(n, n), bot(n, n);
    for (std::size_t i = 0; i < p; ++i) top(i, i) = 1.0;
    for (std::size_t i = 0; i < q; ++i) bot(p + i, p + i) = 1.0;
    basis.push_back(top);
    basis.push_back(bot);
    for (const auto& x : rect_basis) {
        ComplexMatrix up(n, n), down(n, n);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < q; ++j) {
                up(i, p + j) = x(i, j);
                down(p + j, i) = std::conj(x(i, j));
            }
        basis.push_back(up);
        basis.push_back(down);
    }
    return make_system(std::move(basis), n, "paulsen");
}

/// M_n(S) as a concrete operator system in M_{np}: basis E_{i,j} (x) b_k.
inline SystemPtr level_system(const SystemPtr& s, std::size_t n) {
    std::vector<ComplexMatrix> basis;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (const auto& b : s->basis())
                basis.push_back(kron(ComplexMatrix::unit(n, n, i, j), b));
    return make_system(std::move(basis), n * s->ambient(),
                       "M" + std::to_string(n) + "(" + s->name() + ")");
}

/// An element of M_n(S), stored as a matrix in M_n (x) M_p with the level
/// index outermost.
class SystemElement {
public:
    SystemElement(SystemPtr system, std::size_t level, ComplexMatrix rep)
        : system_(std::move(system)), level_(level), rep_(std::move(rep)) {
        const std::size_t d = level_ * system_->ambient();
        if (rep_.rows() != d || rep_.cols() != d)
            throw input_error("element dimension does not match level x ambient");
        if (!rep_.all_finite()) throw input_error("non-finite entry in element");
        for (std::size_t i = 0; i < level_; ++i)
            for (std::size_t j = 0; j < level_; ++j) {
                const auto b = block(i, j);
                if (!system_->contains(b, 1e-9))
                    throw input_error("element block escapes the system span");
            }
    }

    const SystemPtr& system() const { return system_; }
    std::size_t level() const { return level_; }
    const ComplexMatrix& rep() const { return rep_; }

    ComplexMatrix block(std::size_t i, std::size_t j) const {
        const std::size_t p = system_->ambient();
        ComplexMatrix b(p, p);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t c = 0; c < p; ++c) b(a, c) = rep_(i * p + a, j * p + c);
        return b;
    }

    bool hermitian(double tol = 1e-10) const {
        return (rep_ - rep_.adjoint()).max_abs() <= tol * (1.0 + rep_.max_abs());
    }

private:
    SystemPtr system_;
    std::size_t level_;
    ComplexMatrix rep_;
};

/// The matrix order unit e_n = I_n (x) I_p.
inline SystemElement unit_element(const SystemPtr& s, std::size_t level) {
    return SystemElement(s, level, ComplexMatrix::identity(level * s->ambient()));
}

/// Positivity of x in M_n(S): PSD of the concrete representation.
inline PsdVerdict level_positive(const SystemElement& x, double tol) {
    if (!x.hermitian(1e-8)) {
        PsdVerdict v;
        v.positive = false;
        v.lambda_min = 0.0;
        return v;
    }
    return is_psd(HermitianMatrix(x.rep()), tol);
}

/// Norm from the order: inf { lam >= 0 : [[lam e, x],[x*, lam e]] >= 0 },
/// located by bisection. Agrees with the operator norm of the representation.
inline double norm_via_unit(const SystemElement& x) {
    const std::size_t d = x.rep().rows();
    const ComplexMatrix& r = x.rep();
    auto bordered_psd = [&](double lam) {
        ComplexMatrix m(2 * d, 2 * d);
        for (std::size_t i = 0; i < d; ++i) {
            m(i, i) = lam;
            m(d + i, d + i) = lam;
            for (std::size_t j = 0; j < d; ++j) {
                m(i, d + j) = r(i, j);
                m(d + i, j) = std::conj(r(j, i));
            }
        }
        return is_psd(HermitianMatrix(m), 1e-12).positive;
    };
    double lo = 0.0, hi = r.frobenius_norm() + 1.0;
    if (bordered_psd(0.0)) return 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bordered_psd(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace opsys
