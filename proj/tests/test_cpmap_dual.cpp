#include <doctest.h>

#include <cmath>

#include "opsys/cp_map.hpp"
#include "opsys/dual.hpp"
#include "opsys/rng.hpp"

using namespace opsys;

namespace {

ComplexMatrix r_matrix() {
    ComplexMatrix r(3, 3);
    const double v[9] = {1, 1, 0, 1, 1, 1, 0, 1, 1};
    for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = v[k];
    return r;
}

ComplexMatrix scalar(cplx v) {
    ComplexMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

TEST_CASE("choi_matrix: identity on M2 is twice a rank-one projector") {
    const auto w = choi_matrix(identity_map(full_matrix_system(2)));
    const auto e = herm_eig(w);
    CHECK(e.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.eigenvalues[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.eigenvalues[3] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(is_psd(w, 1e-10).positive);
}

TEST_CASE("choi_matrix: Schur multiplier by R is permutation-similar to R + 0") {
    const auto w = choi_matrix(schur_multiplier(r_matrix()));
    const auto e = herm_eig(w);
    // spectrum = spectrum(R) plus six zeros
    CHECK(e.eigenvalues.front() == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-10));
    CHECK(e.eigenvalues.back() == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-10));
    int zeros = 0;
    for (double l : e.eigenvalues)
        if (std::abs(l) < 1e-10) ++zeros;
    CHECK(zeros == 6);
    CHECK_FALSE(is_psd(w, 1e-9).positive);
    // entries: W_{(i,i),(j,j)} = R_{ij}
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(w.matrix()(4 * i, 4 * j) == r_matrix()(i, j));
}

TEST_CASE("choi_matrix: transpose on M2 is the swap with eigenvalues {1,1,1,-1}") {
    const auto w = choi_matrix(transpose_map(2));
    const auto e = herm_eig(w);
    CHECK(e.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.eigenvalues[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("choi_matrix: subsystem domains are rejected") {
    const auto s = path3_system();
    CHECK_THROWS_WITH_AS(choi_matrix(identity_map(s)), "use cp_extension for subsystems",
                         input_error);
}

TEST_CASE("cp_extension: the R functional on S(path3) extends via the all-ones completion") {
    const auto s = path3_system();
    std::vector<ComplexMatrix> images;
    for (auto [i, j] : Graph::path(3).pairs()) images.push_back(scalar(r_matrix()(i, j)));
    const CpMap f(s, 1, images);
    const auto out = cp_extension(f, 1e-8, 50000);
    REQUIRE(out.status == CpStatus::cp);
    // completion entry (1,3) = 1: the extension Choi is the all-ones matrix
    CHECK(std::abs(out.extension_choi.matrix()(0, 2) - cplx(1.0, 0.0)) < 1e-4);
    ComplexMatrix ones(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) ones(i, j) = 1.0;
    CHECK(is_psd(HermitianMatrix(ones), 1e-12).positive);  // the target completion is PSD
    CHECK((out.extension_choi.matrix() - ones).frobenius_norm() < 1e-3);
}

TEST_CASE("cp_extension: Kraus-built maps restricted to a subsystem certify as cp") {
    // 500 seeded trials over mixed subsystem domains, p,q <= 3
    std::size_t ok = 0;
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
        auto rng = Rng::derive(831, trial);
        const std::size_t p = 2 + rng.index(2), q = 2 + rng.index(2);
        SystemPtr dom;
        switch (rng.index(3)) {
            case 0: dom = path3_system(); break;
            case 1: dom = diagonal_system(p); break;
            default: dom = graph_system(Graph::path(p)); break;
        }
        std::vector<ComplexMatrix> kraus;
        const std::size_t nk = 1 + rng.index(3);
        for (std::size_t r = 0; r < nk; ++r) kraus.push_back(rng.gaussian_matrix(q, dom->ambient()));
        const auto out = cp_extension(kraus_map(dom, kraus), 1e-8, 100000);
        if (out.status == CpStatus::cp) ++ok;
    }
    CHECK(ok == 500);
}

TEST_CASE("cp_extension: transpose restricted to the diagonal system is cp") {
    const auto d3 = diagonal_system(3);
    const CpMap f(d3, 3, d3->basis());  // transpose fixes diagonals: identity on D3
    const auto out = cp_extension(f, 1e-8, 50000);
    CHECK(out.status == CpStatus::cp);
}

TEST_CASE("k_positivity_probe: identity on M2 finds nothing") {
    const auto out = k_positivity_probe(identity_map(full_matrix_system(2)), 2, 6, 5, 1e-9);
    CHECK_FALSE(out.violation_found);
}

TEST_CASE("k_positivity_probe: transpose on M2 is caught at k=2") {
    const auto out = k_positivity_probe(transpose_map(2), 2, 10, 5, 1e-9);
    REQUIRE(out.violation_found);
    REQUIRE(out.witness.has_value());
    // witness re-validates: Z positive, phi^(2)(Z) has a negative eigenvalue
    CHECK(level_positive(*out.witness, 1e-9).positive);
    const auto img = transpose_map(2).apply_level(out.witness->rep(), 2);
    CHECK_FALSE(is_psd(HermitianMatrix(img), 1e-9).positive);
    CHECK(out.witness_value < 0.0);
}

TEST_CASE("k_positivity_probe: Schur multiplier by R fails already at k=1") {
    const auto out = k_positivity_probe(schur_multiplier(r_matrix()), 1, 10, 7, 1e-9);
    REQUIRE(out.violation_found);
    CHECK(level_positive(*out.witness, 1e-9).positive);
}

TEST_CASE("tilde_map: identity family gives the identity on M2(M2)") {
    std::vector<std::vector<CpMap>> family(
        2, std::vector<CpMap>(2, identity_map(full_matrix_system(2))));
    const auto t = tilde_map(family);
    auto rng = Rng::derive(403, 0);
    const auto x = rng.random_hermitian(4).matrix();
    CHECK((t.gamma_tilde.apply_level(x, 1) - x).frobenius_norm() == 0.0);
}

TEST_CASE("tilde_map: the compression identity is exact") {
    auto rng = Rng::derive(405, 1);
    const auto m2 = full_matrix_system(2);
    std::vector<std::vector<CpMap>> family;
    family.push_back({identity_map(m2), transpose_map(2)});
    family.push_back({transpose_map(2), identity_map(m2)});
    const auto t = tilde_map(family);

    const std::size_t n = 2, q = 2;
    const auto x = rng.random_hermitian(n * 2).matrix();  // element of M_n(M_2)
    const auto lhs = t.gamma_tilde.apply_level(x, 1);
    // Gamma^{(n)}(x) lives in M_n (x) M_n (x) M_q; compress with V (x) I_q
    const auto big = t.gamma.apply_level(x, n);
    const auto viq = kron(t.compression, ComplexMatrix::identity(q));
    const auto rhs = viq.adjoint() * (big * viq);
    CHECK((lhs - rhs).frobenius_norm() == 0.0);
}

TEST_CASE("tilde_map: transpose corners make both maps non-CP") {
    // the (1,2)/(2,1) pair must be adjoint partners, so the transpose appears
    // in both corners
    const auto m2 = full_matrix_system(2);
    std::vector<std::vector<CpMap>> family;
    family.push_back({identity_map(m2), transpose_map(2)});
    family.push_back({transpose_map(2), identity_map(m2)});
    const auto t = tilde_map(family);
    const auto v1 = k_positivity_probe(t.gamma, 2, 10, 11, 1e-9);
    CHECK(v1.violation_found);
    const auto v2 = k_positivity_probe(t.gamma_tilde, 2, 10, 11, 1e-9);
    CHECK(v2.violation_found);
}

TEST_CASE("tilde_map: diagonal CP family draws no violations") {
    const auto m2 = full_matrix_system(2);
    auto rng = Rng::derive(407, 2);
    const auto k1 = rng.gaussian_matrix(2, 2);
    std::vector<std::vector<CpMap>> family;
    // off-diagonal entries zero: images of the off-diagonal maps are zero
    std::vector<ComplexMatrix> zero_images(4, ComplexMatrix(2, 2));
    const CpMap zero(m2, 2, zero_images);
    family.push_back({kraus_map(m2, {k1}), zero});
    family.push_back({zero, identity_map(m2)});
    const auto t = tilde_map(family);
    CHECK_FALSE(k_positivity_probe(t.gamma, 2, 5, 13, 1e-9).violation_found);
    CHECK_FALSE(k_positivity_probe(t.gamma_tilde, 2, 5, 13, 1e-9).violation_found);
}

TEST_CASE("choi verdict agrees with two-sided probes on random maps") {
    // 50 Kraus-built CP maps and 50 maps from random (generally non-PSD) Choi
    // matrices; the probe runs at k = q with a 200-trial budget
    int agree = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto rng = Rng::derive(833, trial);
        const std::size_t p = 2, q = 2 + trial % 2;
        const auto m = full_matrix_system(p);
        const bool want_cp = trial < 50;
        CpMap phi = want_cp
                        ? kraus_map(m, {rng.gaussian_matrix(q, p), rng.gaussian_matrix(q, p)})
                        : CpMap(m, q, [&] {
                              const auto w = rng.random_hermitian(p * q);
                              std::vector<ComplexMatrix> images;
                              for (auto [i, j] : Graph::complete(p).pairs()) {
                                  ComplexMatrix img(q, q);
                                  for (std::size_t a = 0; a < q; ++a)
                                      for (std::size_t c = 0; c < q; ++c)
                                          img(a, c) = w.matrix()(i * q + a, j * q + c);
                                  images.push_back(img);
                              }
                              return images;
                          }());
        const bool choi_psd = is_psd(choi_matrix(phi), 1e-8).positive;
        const auto probe =
            k_positivity_probe(phi, q, choi_psd ? 8 : 200, 900 + trial, 1e-8);
        if (choi_psd != probe.violation_found) ++agree;
    }
    CHECK(agree == 100);
}

TEST_CASE("dual_matrix_positive: worked block examples at level 1") {
    const auto s = path3_system();
    // coefficients in basis order (0,0),(0,1),(1,0),(1,1),(1,2),(2,1),(2,2)
    auto dual = [&](std::initializer_list<double> a) {
        std::vector<ComplexMatrix> blocks;
        for (double v : a) blocks.push_back(scalar(v));
        return DualElement(s, 1, blocks);
    };
    CHECK(dual_matrix_positive(dual({1, 1, 1, 1, 0, 0, 0}), 1e-8).positive);
    CHECK_FALSE(dual_matrix_positive(dual({0, 1, 1, 0, 0, 0, 0}), 1e-8).positive);
    CHECK(dual_matrix_positive(dual({1, 0, 0, 1, 0, 0, 1}), 1e-8).positive);
}

TEST_CASE("gamma_embed: unit functional lands on the identity") {
    const auto s = path3_system();
    std::vector<ComplexMatrix> blocks{scalar(1), scalar(0), scalar(0), scalar(1),
                                      scalar(0), scalar(0), scalar(1)};
    const auto el = gamma_embed(DualElement(s, 1, blocks));
    CHECK((el.rep() - ComplexMatrix::identity(4)).frobenius_norm() == 0.0);
}

TEST_CASE("gamma_embed: block assembly example") {
    const auto s = path3_system();
    std::vector<ComplexMatrix> blocks{scalar(1), scalar(1), scalar(1), scalar(1),
                                      scalar(0), scalar(0), scalar(0)};
    const auto el = gamma_embed(DualElement(s, 1, blocks));
    CHECK(level_positive(el, 1e-9).positive);
    CHECK(el.rep()(1, 1) == cplx(1.0, 0.0));
    CHECK(el.rep()(2, 2) == cplx(1.0, 0.0));
    CHECK(el.rep()(3, 3) == cplx(0.0, 0.0));
}

TEST_CASE("gamma_embed rejects foreign systems") {
    const auto d = diagonal_system(3);
    std::vector<ComplexMatrix> blocks(3, scalar(1));
    CHECK_THROWS_AS(gamma_embed(DualElement(d, 1, blocks)), input_error);
}

TEST_CASE("gamma_embed positivity matches dual_matrix_positive on random families") {
    const auto s = path3_system();
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        auto rng = Rng::derive(411, trial);
        const std::size_t n = 1 + trial % 2;
        std::vector<ComplexMatrix> blocks(7, ComplexMatrix(n, n));
        // hermitian pairing: A_{ji} = A_{ij}* for mirrored pairs, diagonals hermitian
        blocks[0] = rng.random_hermitian(n).matrix();
        blocks[3] = rng.random_hermitian(n).matrix();
        blocks[6] = rng.random_hermitian(n).matrix();
        blocks[1] = rng.gaussian_matrix(n, n);
        blocks[2] = blocks[1].adjoint();
        blocks[4] = rng.gaussian_matrix(n, n);
        blocks[5] = blocks[4].adjoint();
        const DualElement f(s, n, blocks);
        const bool via_gamma = level_positive(gamma_embed(f), 1e-8).positive;
        const bool via_map = dual_matrix_positive(f, 1e-8, 900 + trial).positive;
        CHECK(via_gamma == via_map);
    }
}
