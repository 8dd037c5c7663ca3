#include <doctest.h>

#include <algorithm>
#include <map>

#include "opsys/chordal.hpp"
#include "opsys/eig.hpp"
#include "opsys/graph.hpp"
#include "opsys/rng.hpp"

using namespace opsys;

namespace {

// Independent oracle: does any perfect elimination ordering exist? Backtracking
// over simplicial choices, equivalent to exhausting all orderings.
bool peo_exists_bruteforce(const Graph& g, std::vector<bool>& gone, std::size_t removed) {
    const std::size_t n = g.vertices();
    if (removed == n) return true;
    for (std::size_t v = 0; v < n; ++v) {
        if (gone[v]) continue;
        std::vector<std::size_t> nb;
        for (std::size_t w = 0; w < n; ++w)
            if (w != v && !gone[w] && g.adjacent(v, w)) nb.push_back(w);
        bool simplicial = true;
        for (std::size_t a = 0; a < nb.size() && simplicial; ++a)
            for (std::size_t b = a + 1; b < nb.size() && simplicial; ++b)
                if (!g.adjacent(nb[a], nb[b])) simplicial = false;
        if (!simplicial) continue;
        gone[v] = true;
        if (peo_exists_bruteforce(g, gone, removed + 1)) {
            gone[v] = false;
            return true;
        }
        gone[v] = false;
    }
    return false;
}

bool peo_exists(const Graph& g) {
    std::vector<bool> gone(g.vertices(), false);
    return peo_exists_bruteforce(g, gone, 0);
}

Graph graph_from_mask(std::size_t n, std::uint64_t mask) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t bit = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++bit)
            if (mask & (1ULL << bit)) edges.emplace_back(i, j);
    return Graph::from_edges(n, edges);
}

void verify_cycle(const Graph& g, const std::vector<std::size_t>& cyc) {
    REQUIRE(cyc.size() >= 4);
    for (std::size_t a = 0; a < cyc.size(); ++a)
        for (std::size_t b = a + 1; b < cyc.size(); ++b) {
            const bool consec = (b == a + 1) || (a == 0 && b == cyc.size() - 1);
            CHECK(g.adjacent(cyc[a], cyc[b]) == consec);
        }
}

}  // namespace

TEST_CASE("Graph: validation") {
    CHECK_THROWS_AS(Graph(2, {{0, 0}, {1, 1}, {0, 1}}), input_error);  // asymmetric
    CHECK_THROWS_AS(Graph(2, {{0, 1}, {1, 0}, {0, 0}}), input_error);  // missing loop
    const Graph p3 = Graph::path(3);
    CHECK(p3.pair_count() == 7);
}

TEST_CASE("lexbfs: path-3 reverse order is a PEO") {
    const Graph g = Graph::path(3);
    auto order = lexbfs(g);
    std::reverse(order.begin(), order.end());
    CHECK(check_peo(g, order).valid);
}

TEST_CASE("lexbfs: deterministic on K4") {
    const Graph g = Graph::complete(4);
    const auto o1 = lexbfs(g);
    const auto o2 = lexbfs(g);
    CHECK(o1 == o2);
    CHECK(o1[0] == 0);  // lowest-index tie break
    std::vector<std::size_t> rev(o1.rbegin(), o1.rend());
    CHECK(check_peo(g, rev).valid);
}

TEST_CASE("lexbfs: 4-cycle fails the PEO check") {
    const Graph g = Graph::cycle(4);
    auto order = lexbfs(g);
    std::reverse(order.begin(), order.end());
    CHECK_FALSE(check_peo(g, order).valid);
    CHECK_FALSE(peo_exists(g));
}

TEST_CASE("is_chordal: verdicts carry validated certificates") {
    const auto v1 = is_chordal(Graph::path(3));
    REQUIRE(v1.chordal);
    CHECK(check_peo(Graph::path(3), v1.ordering.ordering).valid);

    const auto v2 = is_chordal(Graph::cycle(4));
    REQUIRE_FALSE(v2.chordal);
    verify_cycle(Graph::cycle(4), v2.chordless_cycle);

    const auto v3 = is_chordal(Graph::cycle(6));
    REQUIRE_FALSE(v3.chordal);
    verify_cycle(Graph::cycle(6), v3.chordless_cycle);
}

TEST_CASE("is_chordal agrees with exhaustive PEO search on all graphs with <= 5 vertices") {
    for (std::size_t n = 1; n <= 5; ++n) {
        const std::size_t bits = n * (n - 1) / 2;
        for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
            const Graph g = graph_from_mask(n, mask);
            const auto verdict = is_chordal(g);
            CHECK(verdict.chordal == peo_exists(g));
            if (!verdict.chordal) verify_cycle(g, verdict.chordless_cycle);
        }
    }
}

TEST_CASE("maximal cliques and clique tree on path-3") {
    const auto v = is_chordal(Graph::path(3));
    const auto mc = maximal_cliques(Graph::path(3), v.ordering);
    REQUIRE(mc.size() == 2);
    CHECK(std::find(mc.begin(), mc.end(), std::vector<std::size_t>{0, 1}) != mc.end());
    CHECK(std::find(mc.begin(), mc.end(), std::vector<std::size_t>{1, 2}) != mc.end());
    const auto t = clique_tree(Graph::path(3), v.ordering);
    CHECK(t.cliques.size() == 2);
}

TEST_CASE("chordal_decompose: worked path-3 example") {
    ComplexMatrix m(3, 3);
    const double vals[9] = {2, 1, 0, 1, 2, 1, 0, 1, 2};
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = vals[k];
    const Graph g = Graph::path(3);
    const auto peo = is_chordal(g).ordering;
    const auto parts = chordal_decompose(HermitianMatrix(m), g, peo, 0.0);
    REQUIRE(parts.size() == 3);
    ComplexMatrix sum(3, 3);
    for (const auto& p : parts) sum += p.summand.matrix();
    CHECK((sum - m).frobenius_norm() < 1e-12);
    for (const auto& p : parts) {
        CHECK(is_psd(p.summand, 1e-9).positive);
        // support exactly inside the clique
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const bool inside = std::find(p.clique.begin(), p.clique.end(), i) != p.clique.end() &&
                                    std::find(p.clique.begin(), p.clique.end(), j) != p.clique.end();
                if (!inside) CHECK(std::abs(p.summand.matrix()(i, j)) == 0.0);
            }
    }
    // the two-summand display: eliminating vertex 0 gives [[2,1,0],[1,.5,0],[0,0,0]]
    CHECK(std::abs(parts[0].summand.matrix()(1, 1).real() - 0.5) < 1e-12);
}

TEST_CASE("chordal_decompose: diagonal pattern with 2x2 blocks") {
    const Graph g = Graph::loops_only(3);
    const auto peo = is_chordal(g).ordering;
    const auto parts = chordal_decompose(HermitianMatrix::identity(6), g, peo, 0.0);
    REQUIRE(parts.size() == 3);
    for (const auto& p : parts) CHECK(p.clique.size() == 1);
}

TEST_CASE("chordal_decompose: random strictly positive patterned 6x6, q=2") {
    const Graph g = Graph::path(3);
    const auto peo = is_chordal(g).ordering;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        auto rng = Rng::derive(101, trial);
        ComplexMatrix m = rng.random_psd(6).matrix();
        // zero the off-pattern blocks, then push up the diagonal to restore
        // strict positivity
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 4; b < 6; ++b) {
                m(a, b) = 0.0;
                m(b, a) = 0.0;
            }
        const auto ev = herm_eig(HermitianMatrix(m));
        for (std::size_t k = 0; k < 6; ++k) m(k, k) += std::max(0.0, -ev.eigenvalues.front()) + 0.2;
        const HermitianMatrix x(m);
        REQUIRE(is_psd(x, 0.0).positive);
        const auto parts = chordal_decompose(x, g, peo, 0.0);
        ComplexMatrix sum(6, 6);
        for (const auto& p : parts) {
            sum += p.summand.matrix();
            CHECK(is_psd(p.summand, 1e-9).positive);
        }
        CHECK((sum - m).frobenius_norm() <= 1e-8 * (1.0 + m.frobenius_norm()));
    }
}

TEST_CASE("chordal_decompose: merely PSD succeeds for every eps > 0") {
    // rank-1 patterned PSD matrix supported on clique {0,1}
    ComplexMatrix v(3, 1);
    v(0, 0) = 1.0;
    v(1, 0) = 1.0;
    ComplexMatrix m = v * v.adjoint();
    const Graph g = Graph::path(3);
    const auto peo = is_chordal(g).ordering;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const auto parts = chordal_decompose(HermitianMatrix(m), g, peo, eps);
        ComplexMatrix sum(3, 3);
        for (const auto& p : parts) sum += p.summand.matrix();
        ComplexMatrix target = m;
        for (int i = 0; i < 3; ++i) target(i, i) += eps;
        CHECK((sum - target).frobenius_norm() <= 1e-10 * (1.0 + target.frobenius_norm()));
    }
}

TEST_CASE("chordal_decompose: rejects non-chordal patterns and off-pattern mass") {
    const Graph c4 = Graph::cycle(4);
    EliminationOrdering bogus;
    bogus.ordering = {0, 1, 2, 3};
    bogus.simplicial_witness.resize(4);
    CHECK_THROWS_WITH_AS(chordal_decompose(HermitianMatrix::identity(4), c4, bogus, 0.0),
                         "pattern not chordal", input_error);

    const Graph g = Graph::path(3);
    const auto peo = is_chordal(g).ordering;
    ComplexMatrix bad(3, 3);
    bad(0, 2) = 1.0;
    bad(2, 0) = 1.0;
    for (int i = 0; i < 3; ++i) bad(i, i) = 2.0;
    CHECK_THROWS_AS(chordal_decompose(HermitianMatrix(bad), g, peo, 0.0), input_error);
}

TEST_CASE("psd_complete: path-3 scalar completion is forced to the all-ones matrix") {
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    ComplexMatrix one(1, 1);
    one(0, 0) = 1.0;
    for (auto [i, j] : Graph::path(3).pairs()) blocks[{i, j}] = one;
    const PartialBlockMatrix p(Graph::path(3), 1, blocks);
    const auto m = psd_complete(p, 1e-9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(m(i, j) - cplx(1.0, 0.0)) < 1e-10);

    // oracle: scan the free entry on a grid; the PSD set is the single point 1
    for (double t = -2.0; t <= 2.0; t += 1e-3) {
        if (std::abs(t - 1.0) < 5e-4) continue;
        ComplexMatrix c(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) c(i, j) = 1.0;
        c(0, 2) = t;
        c(2, 0) = t;
        CHECK_FALSE(is_psd(HermitianMatrix(c), 1e-6).positive);
    }
}

TEST_CASE("psd_complete: diagonal pattern gives a block-diagonal completion") {
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    for (std::size_t i = 0; i < 3; ++i) blocks[{i, i}] = ComplexMatrix::identity(2);
    const PartialBlockMatrix p(Graph::loops_only(3), 2, blocks);
    const auto m = psd_complete(p, 1e-9);
    CHECK((m.matrix() - ComplexMatrix::identity(6)).frobenius_norm() == 0.0);
}

TEST_CASE("psd_complete: erasing the (1,3) block of a random PSD matrix recompletes to PSD") {
    const Graph g = Graph::path(3);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto rng = Rng::derive(103, trial);
        const auto full = rng.random_psd(6);
        std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
        for (auto [i, j] : g.pairs()) blocks[{i, j}] = detail::block_of(full.matrix(), 2, i, j);
        const PartialBlockMatrix p(g, 2, blocks);
        const auto m = psd_complete(p, 1e-9);
        CHECK(herm_eig(m).eigenvalues.front() >= -1e-9 * (1.0 + m.frobenius_norm()));
        // specified blocks bit-for-bit
        for (auto [i, j] : g.pairs())
            CHECK(detail::block_of(m.matrix(), 2, i, j) == detail::block_of(full.matrix(), 2, i, j));
    }
}

TEST_CASE("psd_complete: error paths") {
    // non-chordal pattern
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    ComplexMatrix one(1, 1);
    one(0, 0) = 1.0;
    for (auto [i, j] : Graph::cycle(4).pairs()) blocks[{i, j}] = one;
    CHECK_THROWS_WITH_AS(psd_complete(PartialBlockMatrix(Graph::cycle(4), 1, blocks), 1e-9),
                         "pattern not chordal", input_error);

    // not partially positive: a clique submatrix with a negative eigenvalue
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> bad;
    ComplexMatrix two(1, 1);
    two(0, 0) = 2.0;
    for (auto [i, j] : Graph::path(3).pairs()) bad[{i, j}] = (i == j) ? one : two;
    CHECK_THROWS_AS(psd_complete(PartialBlockMatrix(Graph::path(3), 1, bad), 1e-9), input_error);
}
