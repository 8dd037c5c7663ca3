#include <doctest.h>

#include "opsys/eig.hpp"
#include "opsys/operator_system.hpp"
#include "opsys/rng.hpp"

using namespace opsys;

namespace {

ComplexMatrix r_matrix() {
    ComplexMatrix r(3, 3);
    const double v[9] = {1, 1, 0, 1, 1, 1, 0, 1, 1};
    for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = v[k];
    return r;
}

// random hermitian element of the span
ComplexMatrix random_span_hermitian(Rng& rng, const SystemPtr& s, std::size_t level) {
    ComplexMatrix x(level * s->ambient(), level * s->ambient());
    for (std::size_t i = 0; i < level; ++i)
        for (std::size_t j = 0; j < level; ++j)
            for (const auto& b : s->basis()) {
                const auto u = kron(ComplexMatrix::unit(level, level, i, j), b);
                x += rng.gaussian_complex() * u;
            }
    return (x + x.adjoint()) * cplx(0.5, 0.0);
}

}  // namespace

TEST_CASE("make_system: valid 3-dimensional system in M2") {
    const auto s = make_system({ComplexMatrix::identity(2), ComplexMatrix::unit(2, 2, 0, 1),
                                ComplexMatrix::unit(2, 2, 1, 0)},
                               2, "demo");
    CHECK(s->dim() == 3);
    CHECK(s->contains(ComplexMatrix::identity(2)));
}

TEST_CASE("make_system: error paths") {
    CHECK_THROWS_WITH_AS(
        make_system({ComplexMatrix::unit(2, 2, 0, 0), ComplexMatrix::unit(2, 2, 0, 1)}, 2, "x"),
        "unit missing", input_error);
    CHECK_THROWS_WITH_AS(
        make_system({ComplexMatrix::identity(2), ComplexMatrix::unit(2, 2, 0, 1)}, 2, "x"),
        "not adjoint-closed", input_error);
    const auto e01 = ComplexMatrix::unit(2, 2, 0, 1);
    CHECK_THROWS_WITH_AS(make_system({ComplexMatrix::identity(2), e01, e01 + e01}, 2, "x"),
                         "basis not independent", input_error);
}

TEST_CASE("graph_system: path-3, complete, and diagonal") {
    CHECK(path3_system()->dim() == 7);
    CHECK(full_matrix_system(2)->dim() == 4);
    CHECK(diagonal_system(3)->dim() == 3);
}

TEST_CASE("paulsen_system: dimensions and validity") {
    // X = span{E_{1,1}} in M_{1,1} gives all of M_2
    const auto s1 = paulsen_system({ComplexMatrix::unit(1, 1, 0, 0)});
    CHECK(s1->dim() == 4);
    CHECK(s1->ambient() == 2);

    // X = M_{1,2} gives a 6-dimensional system in M_3
    const auto s2 =
        paulsen_system({ComplexMatrix::unit(1, 2, 0, 0), ComplexMatrix::unit(1, 2, 0, 1)});
    CHECK(s2->dim() == 6);
    CHECK(s2->ambient() == 3);

    CHECK_THROWS_AS(paulsen_system({ComplexMatrix::unit(1, 2, 0, 0),
                                    ComplexMatrix::unit(1, 2, 0, 0)}),
                    input_error);
}

TEST_CASE("SystemElement: blocks must stay in the span") {
    const auto d2 = diagonal_system(2);
    CHECK_THROWS_AS(SystemElement(d2, 1, ComplexMatrix::unit(2, 2, 0, 1)), input_error);
    CHECK_NOTHROW(SystemElement(d2, 2, ComplexMatrix::identity(4)));
}

TEST_CASE("level_positive: unit, R, and a positive patterned matrix") {
    const auto s = path3_system();
    CHECK(level_positive(unit_element(s, 2), 1e-9).positive);

    CHECK_FALSE(level_positive(SystemElement(s, 1, r_matrix()), 1e-9).positive);

    ComplexMatrix m(3, 3);
    const double v[9] = {2, 1, 0, 1, 2, 1, 0, 1, 2};
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = v[k];
    CHECK(level_positive(SystemElement(s, 1, m), 1e-9).positive);
}

TEST_CASE("level_positive: invariance under graph automorphism conjugation") {
    // the path-3 reversal 0<->2 fixes the graph, so conjugating by I_n (x) w
    // stays inside the system and preserves positivity
    const auto s = path3_system();
    ComplexMatrix w(3, 3);
    w(0, 2) = 1.0;
    w(1, 1) = 1.0;
    w(2, 0) = 1.0;
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
        auto rng = Rng::derive(301, trial);
        const std::size_t n = 1 + trial % 2;
        const auto x = random_span_hermitian(rng, s, n);
        const auto conj = kron(ComplexMatrix::identity(n), w) * x *
                          kron(ComplexMatrix::identity(n), w).adjoint();
        const auto a = level_positive(SystemElement(s, n, x), 1e-8);
        const auto b = level_positive(SystemElement(s, n, conj), 1e-8);
        CHECK(a.positive == b.positive);
    }
}

TEST_CASE("norm_via_unit: matrix unit and order unit have norm one") {
    const auto m2 = full_matrix_system(2);
    CHECK(norm_via_unit(SystemElement(m2, 1, ComplexMatrix::unit(2, 2, 0, 1))) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(norm_via_unit(unit_element(m2, 1)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("norm_via_unit matches the largest singular value") {
    const std::vector<SystemPtr> systems{full_matrix_system(2), path3_system(),
                                         diagonal_system(3),
                                         paulsen_system({ComplexMatrix::unit(1, 1, 0, 0)})};
    for (const auto& s : systems) {
        for (std::uint64_t trial = 0; trial < 12; ++trial) {
            auto rng = Rng::derive(307, 100 * s->ambient() + trial);
            const std::size_t n = 1 + trial % 3;
            ComplexMatrix x(n * s->ambient(), n * s->ambient());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    for (const auto& b : s->basis())
                        x += rng.gaussian_complex() * kron(ComplexMatrix::unit(n, n, i, j), b);
            const SystemElement el(s, n, x);
            CHECK(std::abs(norm_via_unit(el) - operator_norm(x)) < 1e-8 * (1.0 + operator_norm(x)));
        }
    }
}

TEST_CASE("one-dimensional scalar system is allowed") {
    const auto s = make_system({ComplexMatrix::identity(2)}, 2, "scalars");
    CHECK(s->dim() == 1);
    CHECK(level_positive(unit_element(s, 3), 1e-9).positive);
}

TEST_CASE("multiplicative closure detection") {
    CHECK(full_matrix_system(2)->multiplicatively_closed());
    CHECK(diagonal_system(3)->multiplicatively_closed());
    CHECK_FALSE(path3_system()->multiplicatively_closed());
}
