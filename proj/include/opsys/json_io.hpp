#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opsys/chordal.hpp"
#include "opsys/dual.hpp"
#include "opsys/graph.hpp"
#include "opsys/operator_system.hpp"
#include "opsys/separation.hpp"
#include "opsys/tensor.hpp"

namespace opsys {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// shared JSON formats
//   matrix:  {"rows": n, "cols": m, "entries": [[re, im], ...]} row-major
//   system:  {"name": str, "ambient": p, "basis": [matrix, ...]}
//   graph:   {"vertices": n, "edges": [[i, j], ...]}  (1-based, loops implied)
//   partial: {"pattern": graph, "q": b, "blocks": {"i,j": matrix}}
//   element: {"left": system, "right": system, "level": n, "rep": matrix}
//   cert:    {"terms": [{"alpha": m, "P": m, "Q": m}], "eps": e}
// ---------------------------------------------------------------------------

inline json matrix_to_json(const ComplexMatrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json entries = json::array();
    for (const auto& z : m.entries()) entries.push_back({z.real(), z.imag()});
    j["entries"] = std::move(entries);
    return j;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw input_error("schema: matrix needs rows, cols, entries");
    const std::size_t rows = j["rows"].get<std::size_t>();
    const std::size_t cols = j["cols"].get<std::size_t>();
    const auto& entries = j["entries"];
    if (!entries.is_array() || entries.size() != rows * cols)
        throw input_error("schema: entries length must equal rows*cols");
    ComplexMatrix m(rows, cols);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (!e.is_array() || e.size() != 2)
            throw input_error("schema: each entry is a [re, im] pair");
        const double re = e[0].get<double>(), im = e[1].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im))
            throw input_error("non-finite entry at (" + std::to_string(k / cols + 1) + "," +
                              std::to_string(k % cols + 1) + ")");
        m(k / cols, k % cols) = cplx(re, im);
    }
    return m;
}

inline json system_to_json(const SystemPtr& s) {
    json j;
    j["name"] = s->name();
    j["ambient"] = s->ambient();
    json basis = json::array();
    for (const auto& b : s->basis()) basis.push_back(matrix_to_json(b));
    j["basis"] = std::move(basis);
    return j;
}

inline SystemPtr system_from_json(const json& j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "path3") return path3_system();
        if (name.rfind("M", 0) == 0) return full_matrix_system(std::stoul(name.substr(1)));
        if (name.rfind("D", 0) == 0) return diagonal_system(std::stoul(name.substr(1)));
        throw input_error("schema: unknown named system '" + name + "'");
    }
    if (!j.is_object()) throw input_error("schema: system must be an object");
    if (j.is_object() && j.contains("graph")) {
        // convenience: {"graph": {...}} wraps a graph system
        const auto& g = j["graph"];
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (const auto& e : g.value("edges", json::array()))
            edges.emplace_back(e[0].get<std::size_t>() - 1, e[1].get<std::size_t>() - 1);
        return graph_system(Graph::from_edges(g["vertices"].get<std::size_t>(), edges),
                            j.value("name", std::string{}));
    }
    if (!j.contains("ambient") || !j.contains("basis"))
        throw input_error("schema: system needs ambient and basis");
    std::vector<ComplexMatrix> basis;
    for (const auto& b : j["basis"]) basis.push_back(matrix_from_json(b));
    return make_system(std::move(basis), j["ambient"].get<std::size_t>(),
                       j.value("name", std::string("system")));
}

inline json graph_to_json(const Graph& g) {
    json j;
    j["vertices"] = g.vertices();
    json edges = json::array();
    for (auto [a, b] : g.pairs())
        if (a < b) edges.push_back({a + 1, b + 1});
    j["edges"] = std::move(edges);
    return j;
}

inline Graph graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("vertices"))
        throw input_error("schema: graph needs vertices");
    const std::size_t n = j["vertices"].get<std::size_t>();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : j.value("edges", json::array())) {
        if (!e.is_array() || e.size() != 2) throw input_error("schema: edge must be a pair");
        const std::size_t a = e[0].get<std::size_t>(), b = e[1].get<std::size_t>();
        if (a < 1 || b < 1 || a > n || b > n)
            throw input_error("schema: edge index out of range (vertices are 1-based)");
        edges.emplace_back(a - 1, b - 1);
    }
    return Graph::from_edges(n, edges);
}

inline json partial_to_json(const PartialBlockMatrix& p) {
    json j;
    j["pattern"] = graph_to_json(p.pattern());
    j["q"] = p.block_size();
    json blocks = json::object();
    for (auto [a, b] : p.pattern().pairs())
        if (a <= b)
            blocks[std::to_string(a + 1) + "," + std::to_string(b + 1)] =
                matrix_to_json(p.block(a, b));
    j["blocks"] = std::move(blocks);
    return j;
}

inline PartialBlockMatrix partial_from_json(const json& j) {
    if (!j.is_object() || !j.contains("pattern") || !j.contains("q") || !j.contains("blocks"))
        throw input_error("schema: partial matrix needs pattern, q, blocks");
    const Graph g = graph_from_json(j["pattern"]);
    const std::size_t q = j["q"].get<std::size_t>();
    std::map<std::pair<std::size_t, std::size_t>, ComplexMatrix> blocks;
    for (const auto& [key, val] : j["blocks"].items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) throw input_error("schema: block key must be \"i,j\"");
        const std::size_t a = std::stoul(key.substr(0, comma));
        const std::size_t b = std::stoul(key.substr(comma + 1));
        if (a < 1 || b < 1) throw input_error("schema: block indices are 1-based");
        blocks[{a - 1, b - 1}] = matrix_from_json(val);
    }
    return PartialBlockMatrix(g, q, blocks);
}

inline json element_to_json(const TensorElement& u) {
    json j;
    j["left"] = system_to_json(u.left());
    j["right"] = system_to_json(u.right());
    j["level"] = u.level();
    j["rep"] = matrix_to_json(u.rep());
    return j;
}

inline TensorElement element_from_json(const json& j) {
    if (!j.is_object() || !j.contains("left") || !j.contains("right") || !j.contains("rep"))
        throw input_error("schema: tensor element needs left, right, level, rep");
    return TensorElement(system_from_json(j["left"]), system_from_json(j["right"]),
                         j.value("level", std::size_t{1}), matrix_from_json(j["rep"]));
}

inline json certificate_to_json(const DmaxCertificate& cert) {
    json j;
    json terms = json::array();
    for (const auto& t : cert.terms) {
        json jt;
        jt["alpha"] = matrix_to_json(t.alpha);
        jt["P"] = matrix_to_json(t.p.rep());
        jt["Q"] = matrix_to_json(t.q.rep());
        terms.push_back(std::move(jt));
    }
    j["terms"] = std::move(terms);
    j["eps"] = cert.eps;
    return j;
}

/// Certificates are stored with bare factor representations; the systems come
/// from the element they certify.
inline DmaxCertificate certificate_from_json(const json& j, const SystemPtr& left,
                                             const SystemPtr& right) {
    if (!j.is_object() || !j.contains("terms") || !j.contains("eps"))
        throw input_error("schema: certificate needs terms and eps");
    DmaxCertificate cert;
    cert.eps = j["eps"].get<double>();
    for (const auto& jt : j["terms"]) {
        const auto alpha = matrix_from_json(jt["alpha"]);
        const auto prep = matrix_from_json(jt["P"]);
        const auto qrep = matrix_from_json(jt["Q"]);
        if (prep.rows() % left->ambient() != 0 || qrep.rows() % right->ambient() != 0)
            throw input_error("schema: certificate factor dimensions do not match the systems");
        cert.terms.push_back({alpha, SystemElement(left, prep.rows() / left->ambient(), prep),
                              SystemElement(right, qrep.rows() / right->ambient(), qrep)});
    }
    return cert;
}

inline json dual_to_json(const DualElement& f) {
    json j;
    j["system"] = system_to_json(f.system());
    j["level"] = f.level();
    json blocks = json::array();
    for (const auto& b : f.blocks()) blocks.push_back(matrix_to_json(b));
    j["blocks"] = std::move(blocks);
    return j;
}

inline DualElement dual_from_json(const json& j) {
    if (!j.is_object() || !j.contains("system") || !j.contains("blocks"))
        throw input_error("schema: dual element needs system, level, blocks");
    auto sys = system_from_json(j["system"]);
    std::vector<ComplexMatrix> blocks;
    for (const auto& b : j["blocks"]) blocks.push_back(matrix_from_json(b));
    return DualElement(std::move(sys), j.value("level", std::size_t{1}), std::move(blocks));
}

inline json parse_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw input_error("malformed JSON");
    return j;
}

}  // namespace opsys
