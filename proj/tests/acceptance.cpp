// Acceptance suite: one line per criterion, PASS/FAIL at the pinned
// tolerances, nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "opsys/experiment.hpp"
#include "opsys/json_io.hpp"

using namespace opsys;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void line(int id, const char* name, bool pass, double ms, const std::string& detail = "") {
    std::printf("%s criterion-%d %s (%.1f ms)%s%s\n", pass ? "PASS" : "FAIL", id, name, ms,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

ComplexMatrix r_matrix() {
    ComplexMatrix r(3, 3);
    const double v[9] = {1, 1, 0, 1, 1, 1, 0, 1, 1};
    for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = v[k];
    return r;
}

SystemElement random_positive(Rng& rng, const SystemPtr& s, std::size_t level) {
    return opsys::detail::random_positive_element(rng, s, level);
}

}  // namespace

int main() {
    const std::uint64_t seed = 42;

    {  // 1: the R matrix counterexample
        Timer t;
        const auto eig = herm_eig(HermitianMatrix(r_matrix()));
        const double lo = 1.0 - std::sqrt(2.0), hi = 1.0 + std::sqrt(2.0);
        bool ok = std::abs(eig.eigenvalues[0] - lo) < 1e-9 &&
                  std::abs(eig.eigenvalues[1] - 1.0) < 1e-9 &&
                  std::abs(eig.eigenvalues[2] - hi) < 1e-9;
        const auto verdict = is_psd(HermitianMatrix(r_matrix()), 1e-9);
        ok = ok && !verdict.positive;
        if (ok) {
            cplx quad = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    quad += std::conj(verdict.witness[i]) * r_matrix()(i, j) * verdict.witness[j];
            ok = quad.real() <= lo + 1e-9;
        }
        line(1, "r-matrix-eigenvalues-and-witness", ok, t.ms());
    }

    {  // 2: Schur multiplier CP iff coefficient matrix PSD
        Timer t;
        std::size_t agree = 0;
        for (std::uint64_t k = 0; k < 100; ++k) {
            auto rng = Rng::derive(seed ^ 0x200ULL, k);
            const auto coeff = rng.random_hermitian(3);
            const bool a = is_psd(coeff, 1e-8).positive;
            const bool b = is_psd(choi_matrix(schur_multiplier(coeff.matrix())), 1e-8).positive;
            if (a == b) ++agree;
        }
        line(2, "schur-multiplier-criterion", agree == 100, t.ms(),
             std::to_string(agree) + "/100 agreements");
    }

    {  // 3: chordal min=max certification on S(path3) (x) M2
        Timer t;
        std::size_t good = 0;
        for (std::uint64_t k = 0; k < 200; ++k) {
            auto rng = Rng::derive(seed ^ 0x302ULL, k);
            const auto u = experiment_detail::random_path3_patterned(rng, 2, 0.1);
            const auto inner = max_member_inner(u, 1e-6, InnerStrategy::chordal);
            if (!inner.certified) continue;
            const auto chk = validate_certificate(inner.certificate, u);
            if (chk.valid &&
                chk.reconstruction_error <= 1e-8 * (1.0 + u.rep_plus_unit(1e-6).frobenius_norm()))
                ++good;
        }
        line(3, "chordal-min-max-certification", good == 200, t.ms(),
             std::to_string(good) + "/200 certified");
    }

    {  // 4: generator elements always pass min_member
        Timer t;
        std::size_t good = 0;
        for (std::uint64_t k = 0; k < 500; ++k) {
            auto rng = Rng::derive(seed ^ 0x600ULL, k);
            const auto s = experiment_detail::random_system(rng, 4);
            const auto tt = experiment_detail::random_system(rng, 4);
            const std::size_t kk = 1 + rng.index(3), m = 1 + rng.index(3), n = 1 + rng.index(2);
            const auto p = random_positive(rng, s, kk);
            const auto q = random_positive(rng, tt, m);
            const auto [el, cert] = dmax_make(rng.gaussian_matrix(n, kk * m), p, q);
            if (min_member(el, 1e-9).positive) ++good;
        }
        line(4, "dmax-inside-min", good == 500, t.ms(), std::to_string(good) + "/500 positive");
    }

    {  // 5: the matrix-algebra identity reconstructs exactly
        Timer t;
        const std::vector<SystemPtr> systems{make_system({ComplexMatrix::identity(1)}, 1, "C"),
                                             full_matrix_system(2), path3_system(),
                                             diagonal_system(3)};
        std::size_t good = 0;
        for (std::uint64_t k = 0; k < 100; ++k) {
            auto rng = Rng::derive(seed ^ 0x500ULL, k);
            const auto& s = systems[k % systems.size()];
            const std::size_t n = 1 + k % 3;
            const auto u = random_positive(rng, s, n);
            const auto [el, cert] = frame_certificate(u);
            if ((el.rep() - u.rep()).frobenius_norm() <= 1e-12) ++good;
        }
        line(5, "matrix-algebra-identity-exact", good == 100, t.ms(),
             std::to_string(good) + "/100 exact");
    }

    {  // 6: dual equivalence through the block-diagonal representation
        Timer t;
        std::size_t agree = 0;
        for (std::uint64_t k = 0; k < 200; ++k) {
            auto rng = Rng::derive(seed ^ 0x400ULL, k);
            const std::size_t n = 1 + k % 2;
            const auto f = experiment_detail::random_dual_family(rng, n);
            const bool via_gamma = level_positive(gamma_embed(f), 1e-8).positive;
            const bool via_map = dual_matrix_positive(f, 1e-8, seed + k).positive;
            if (via_gamma == via_map) ++agree;
        }
        line(6, "dual-gamma-equivalence", agree == 200, t.ms(),
             std::to_string(agree) + "/200 agreements");
    }

    {  // 7: chordal PSD completion
        Timer t;
        bool fixed_ok = false;
        {
            std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
            ComplexMatrix one(1, 1);
            one(0, 0) = 1.0;
            for (auto [i, j] : Graph::path(3).pairs()) blocks[{i, j}] = one;
            const auto m = psd_complete(PartialBlockMatrix(Graph::path(3), 1, blocks), 1e-9);
            fixed_ok = true;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    fixed_ok = fixed_ok && std::abs(m(i, j) - cplx(1.0, 0.0)) < 1e-10;
        }
        std::size_t good = 0;
        for (std::uint64_t k = 0; k < 100; ++k) {
            auto rng = Rng::derive(seed ^ 0x800ULL, k);
            const auto full = rng.random_psd(6);
            std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
            for (auto [i, j] : Graph::path(3).pairs())
                blocks[{i, j}] = opsys::detail::block_of(full.matrix(), 2, i, j);
            const auto m = psd_complete(PartialBlockMatrix(Graph::path(3), 2, blocks), 1e-9);
            bool ok = herm_eig(m).eigenvalues.front() >= -1e-9 * (1.0 + m.frobenius_norm());
            for (auto [i, j] : Graph::path(3).pairs())
                ok = ok && opsys::detail::block_of(m.matrix(), 2, i, j) ==
                               opsys::detail::block_of(full.matrix(), 2, i, j);
            if (ok) ++good;
        }
        line(7, "psd-completion", fixed_ok && good == 100, t.ms(),
             std::to_string(good) + "/100 random completions");
    }

    {  // 8: chordality recognition, exhaustive over 6 vertices
        Timer t;
        std::size_t graphs = 0, agreements = 0;
        const std::size_t n = 6, bits = n * (n - 1) / 2;
        for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j, ++bit)
                    if (mask & (1ULL << bit)) edges.emplace_back(i, j);
            const Graph g = Graph::from_edges(n, edges);
            ++graphs;
            if (is_chordal(g).chordal == experiment_detail::peo_exists(g)) ++agreements;
        }
        line(8, "chordality-exhaustive-6-vertices", graphs == agreements && graphs == 32768,
             t.ms(), std::to_string(agreements) + "/" + std::to_string(graphs) + " agreements");
    }

    {  // 9: norm from the order unit vs largest singular value
        Timer t;
        const std::vector<SystemPtr> systems{
            full_matrix_system(2), path3_system(), diagonal_system(3),
            paulsen_system({ComplexMatrix::unit(1, 1, 0, 0)}), full_matrix_system(3)};
        std::size_t good = 0, total = 0;
        for (const auto& s : systems) {
            for (std::uint64_t k = 0; k < 20; ++k) {
                auto rng = Rng::derive(seed ^ 0x900ULL, 100 * s->ambient() + k);
                const std::size_t n = 1 + k % 3;
                ComplexMatrix x(n * s->ambient(), n * s->ambient());
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        for (const auto& b : s->basis())
                            x += rng.gaussian_complex() * kron(ComplexMatrix::unit(n, n, i, j), b);
                const SystemElement el(s, n, x);
                ++total;
                if (std::abs(norm_via_unit(el) - operator_norm(x)) <=
                    1e-8 * (1.0 + operator_norm(x)))
                    ++good;
            }
        }
        line(9, "norm-from-order", good == total && total == 100, t.ms(),
             std::to_string(good) + "/100 matches");
    }

    {  // 10: the separation experiment completes with certificate integrity
        Timer t;
        const auto left = gamma_dual_system();
        const auto right = path3_system();
        const auto dual_rep = path3_gamma_representation();
        bool integrity_ok = true;
        std::size_t attempts = 0, separations = 0;
        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            const std::size_t candidates = n == 1 ? 6 : 4;
            for (std::uint64_t c = 0; c < candidates; ++c) {
                TensorElement u = [&] {
                    if (n == 1 && c == 0) return experiment_detail::tautological_element();
                    if (n == 2 && c == 0) {
                        const auto tau = experiment_detail::tautological_element();
                        return TensorElement(left, right, 2,
                                             kron(ComplexMatrix::identity(2), tau.rep()));
                    }
                    auto rng = Rng::derive(seed ^ 0x901ULL, 100 * n + c);
                    ComplexMatrix x(n * 12, n * 12);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            for (const auto& bl : left->basis())
                                for (const auto& br : right->basis())
                                    x += rng.gaussian_complex() *
                                         kron(ComplexMatrix::unit(n, n, i, j), kron(bl, br));
                    x = (x + x.adjoint()) * cplx(0.5, 0.0);
                    const auto ev = herm_eig(HermitianMatrix(x));
                    for (std::size_t i = 0; i < x.rows(); ++i)
                        x(i, i) += std::max(0.0, -ev.eigenvalues.front()) + 0.02;
                    return TensorElement(left, right, n, x);
                }();
                if (!min_member(u, 1e-9).positive) continue;
                ++attempts;
                const auto outc = max_member_outer(u, 2, dual_rep, 1e-8, 12000, seed + 7 * c + n);
                if (outc.separated && outc.functional) {
                    ++separations;
                    const double val = hs_inner(outc.functional->w.matrix(), u.rep()).real();
                    bool ok = val <= -1e-6 * u.rep().frobenius_norm();
                    bool exact = false;
                    for (const auto& v : outc.functional->validation)
                        if (v.method == "exact-via-dual-representation" && v.passed) exact = true;
                    integrity_ok = integrity_ok && ok && exact;
                }
            }
        }
        line(10, "gamma-separation-experiment", integrity_ok && attempts > 0, t.ms(),
             std::to_string(separations) + " separations over " + std::to_string(attempts) +
                 " candidates at levels {1,2}");
    }

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return 1;
}
