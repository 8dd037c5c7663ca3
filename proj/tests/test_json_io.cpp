#include <doctest.h>

#include "opsys/json_io.hpp"
#include "opsys/rng.hpp"

using namespace opsys;

TEST_CASE("matrix JSON round-trip and diagnostics") {
    auto rng = Rng::derive(601, 0);
    const auto m = rng.gaussian_matrix(3, 2);
    const auto back = matrix_from_json(matrix_to_json(m));
    CHECK(back == m);

    CHECK_THROWS_WITH_AS(parse_text("{nope"), "malformed JSON", input_error);
    CHECK_THROWS_AS(matrix_from_json(parse_text("{\"rows\": 2}")), input_error);

    // non-finite entries are named by position
    json bad;
    bad["rows"] = 1;
    bad["cols"] = 2;
    bad["entries"] = {{1.0, 0.0}, {std::numeric_limits<double>::quiet_NaN(), 0.0}};
    CHECK_THROWS_WITH_AS(matrix_from_json(bad), "non-finite entry at (1,2)", input_error);
}

TEST_CASE("graph JSON: path-3 parses to seven ordered pairs") {
    const auto g = graph_from_json(parse_text(R"({"vertices":3,"edges":[[1,2],[2,3]]})"));
    CHECK(g.pair_count() == 7);
    CHECK(g == Graph::path(3));
    const auto back = graph_from_json(graph_to_json(g));
    CHECK(back == g);
}

TEST_CASE("system JSON: named systems, graph wrapper, and schema failures") {
    CHECK(system_from_json(json("path3"))->dim() == 7);
    CHECK(system_from_json(json("M2"))->dim() == 4);
    CHECK(system_from_json(json("D3"))->dim() == 3);

    const auto s = system_from_json(
        parse_text(R"({"name":"p3","graph":{"vertices":3,"edges":[[1,2],[2,3]]}})"));
    CHECK(s->dim() == 7);

    const auto round = system_from_json(system_to_json(path3_system()));
    CHECK(round->dim() == 7);
    CHECK(round->ambient() == 3);

    // a system missing its unit is rejected by validation
    json nounit;
    nounit["ambient"] = 2;
    nounit["basis"] = {matrix_to_json(ComplexMatrix::unit(2, 2, 0, 0))};
    CHECK_THROWS_WITH_AS(system_from_json(nounit), "unit missing", input_error);
}

TEST_CASE("partial matrix JSON round-trip") {
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    auto rng = Rng::derive(603, 0);
    const auto full = rng.random_psd(6);
    for (auto [i, j] : Graph::path(3).pairs())
        blocks[{i, j}] = opsys::detail::block_of(full.matrix(), 2, i, j);
    const PartialBlockMatrix p(Graph::path(3), 2, blocks);
    const auto back = partial_from_json(partial_to_json(p));
    CHECK(back.block_size() == 2);
    for (auto [i, j] : Graph::path(3).pairs()) CHECK(back.block(i, j) == p.block(i, j));
}

TEST_CASE("tensor element and certificate JSON round-trip revalidates") {
    auto rng = Rng::derive(605, 0);
    const auto s = path3_system();
    const auto t = full_matrix_system(2);
    const auto p = opsys::detail::random_positive_element(rng, s, 2);
    const auto q = opsys::detail::random_positive_element(rng, t, 1);
    const auto [el, cert] = dmax_make(rng.gaussian_matrix(1, 2), p, q);

    const auto el2 = element_from_json(element_to_json(el));
    CHECK((el2.rep() == el.rep()));

    const auto cert2 = certificate_from_json(certificate_to_json(cert), el2.left(), el2.right());
    CHECK(validate_certificate(cert2, el2).valid);
}

TEST_CASE("dual element JSON round-trip") {
    std::vector<ComplexMatrix> blocks;
    for (int k = 0; k < 7; ++k) {
        ComplexMatrix b(1, 1);
        b(0, 0) = (k == 0 || k == 3 || k == 6) ? 1.0 : 0.0;
        blocks.push_back(b);
    }
    const DualElement f(path3_system(), 1, blocks);
    const auto back = dual_from_json(dual_to_json(f));
    CHECK(back.level() == 1);
    CHECK(back.blocks().size() == 7);
}
