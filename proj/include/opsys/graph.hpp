#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "opsys/complex_matrix.hpp"

namespace opsys {

/// Undirected graph with loops on vertices 0..n-1. The relation is kept
/// symmetric and reflexive by construction; building one from a pair set that
/// is not rejects the input.
class Graph {
public:
    Graph() : n_(0) {}

    /// Validating constructor from an explicit pair set (must contain all loops
    /// and be symmetric).
    Graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs)
        : n_(n), adj_(n, std::vector<bool>(n, false)) {
        for (auto [i, j] : pairs) {
            if (i >= n || j >= n) throw input_error("not a graph with loops");
            adj_[i][j] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!adj_[i][i]) throw input_error("not a graph with loops");
            for (std::size_t j = 0; j < n; ++j)
                if (adj_[i][j] != adj_[j][i]) throw input_error("not a graph with loops");
        }
    }

    /// Symmetrizing factory: undirected edge list, loops implied.
    static Graph from_edges(std::size_t n,
                            const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, i);
        for (auto [i, j] : edges) {
            if (i >= n || j >= n) throw input_error("edge index out of range");
            pairs.emplace_back(i, j);
            pairs.emplace_back(j, i);
        }
        return Graph(n, pairs);
    }

    static Graph complete(std::size_t n) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(i, j);
        return Graph(n, pairs);
    }

    static Graph loops_only(std::size_t n) { return from_edges(n, {}); }

    static Graph path(std::size_t n) {
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
        return from_edges(n, e);
    }

    static Graph cycle(std::size_t n) {
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
        if (n > 2) e.emplace_back(n - 1, 0);
        return from_edges(n, e);
    }

    std::size_t vertices() const { return n_; }
    bool adjacent(std::size_t i, std::size_t j) const { return adj_[i][j]; }

    /// Ordered pair set including loops, row-major.
    std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (adj_[i][j]) out.emplace_back(i, j);
        return out;
    }

    std::size_t pair_count() const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) c += adj_[i][j] ? 1 : 0;
        return c;
    }

    bool is_clique(const std::vector<std::size_t>& vs) const {
        for (auto a : vs)
            for (auto b : vs)
                if (!adj_[a][b]) return false;
        return true;
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.adj_ == b.adj_;
    }

private:
    std::size_t n_;
    std::vector<std::vector<bool>> adj_;
};

struct EliminationOrdering {
    std::vector<std::size_t> ordering;  // elimination order
    // simplicial witness: for the vertex at position k, its neighbors occurring
    // later in the ordering (they must form a clique)
    std::vector<std::vector<std::size_t>> simplicial_witness;
};

/// Lexicographic breadth-first search, ties broken by lowest vertex index.
/// The reverse of the returned visit order is a perfect elimination ordering
/// exactly when the graph is chordal.
inline std::vector<std::size_t> lexbfs(const Graph& g) {
    const std::size_t n = g.vertices();
    std::vector<std::vector<std::size_t>> label(n);
    std::vector<bool> visited(n, false);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (visited[v]) continue;
            if (best == n || label[v] > label[best]) best = v;  // lowest index wins ties
        }
        visited[best] = true;
        order.push_back(best);
        for (std::size_t w = 0; w < n; ++w)
            if (!visited[w] && w != best && g.adjacent(best, w))
                label[w].push_back(n - step);  // decreasing stamps keep lex order meaningful
    }
    return order;
}

/// Checks whether `elim` is a perfect elimination ordering; on success fills in
/// the simplicial witnesses. On failure reports the violating triple
/// (v, x, y): x, y are later neighbors of v that are not adjacent.
struct PeoCheck {
    bool valid = false;
    EliminationOrdering ordering;
    std::size_t bad_v = 0, bad_x = 0, bad_y = 0;
};

inline PeoCheck check_peo(const Graph& g, const std::vector<std::size_t>& elim) {
    const std::size_t n = g.vertices();
    std::vector<std::size_t> pos(n);
    for (std::size_t k = 0; k < n; ++k) pos[elim[k]] = k;
    PeoCheck out;
    out.ordering.ordering = elim;
    out.ordering.simplicial_witness.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t v = elim[k];
        std::vector<std::size_t> later;
        for (std::size_t w = 0; w < n; ++w)
            if (w != v && g.adjacent(v, w) && pos[w] > k) later.push_back(w);
        for (std::size_t a = 0; a < later.size(); ++a)
            for (std::size_t b = a + 1; b < later.size(); ++b)
                if (!g.adjacent(later[a], later[b])) {
                    out.valid = false;
                    out.bad_v = v;
                    out.bad_x = later[a];
                    out.bad_y = later[b];
                    return out;
                }
        out.ordering.simplicial_witness[k] = std::move(later);
    }
    out.valid = true;
    return out;
}

struct ChordalityVerdict {
    bool chordal = false;
    EliminationOrdering ordering;            // valid PEO when chordal
    std::vector<std::size_t> chordless_cycle;  // length >= 4, verified, when not
};

namespace detail {

/// Shortest x..y path avoiding `banned`, or empty. Plain BFS; a shortest path
/// is induced, which is what the hole certificate needs.
inline std::vector<std::size_t> bfs_path(const Graph& g, std::size_t x, std::size_t y,
                                         const std::vector<bool>& banned) {
    const std::size_t n = g.vertices();
    std::vector<std::size_t> prev(n, n);
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(x);
    seen[x] = true;
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        if (u == y) break;
        for (std::size_t w = 0; w < n; ++w) {
            if (w == u || seen[w] || banned[w] || !g.adjacent(u, w)) continue;
            seen[w] = true;
            prev[w] = u;
            q.push(w);
        }
    }
    if (!seen[y]) return {};
    std::vector<std::size_t> path{y};
    while (path.back() != x) path.push_back(prev[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

/// Assembles and verifies a chordless cycle through v, x, y where x and y are
/// nonadjacent neighbors of v: v-x-...-y-v with the x..y path avoiding N[v].
inline std::optional<std::vector<std::size_t>> hole_through(const Graph& g, std::size_t v,
                                                            std::size_t x, std::size_t y) {
    const std::size_t n = g.vertices();
    std::vector<bool> banned(n, false);
    banned[v] = true;
    for (std::size_t w = 0; w < n; ++w)
        if (w != v && g.adjacent(v, w) && w != x && w != y) banned[w] = true;
    auto path = bfs_path(g, x, y, banned);
    if (path.empty()) return std::nullopt;
    std::vector<std::size_t> cyc{v};
    cyc.insert(cyc.end(), path.begin(), path.end());
    if (cyc.size() < 4) return std::nullopt;
    // verify: consecutive adjacency, no chords
    for (std::size_t a = 0; a < cyc.size(); ++a)
        for (std::size_t b = a + 1; b < cyc.size(); ++b) {
            const bool consecutive = (b == a + 1) || (a == 0 && b == cyc.size() - 1);
            if (g.adjacent(cyc[a], cyc[b]) != consecutive) return std::nullopt;
        }
    return cyc;
}

}  // namespace detail

/// Chordality recognition: Lex-BFS then PEO verification. A chordal verdict
/// carries the validated elimination ordering; a negative one carries an
/// explicitly verified chordless cycle of length >= 4.
inline ChordalityVerdict is_chordal(const Graph& g) {
    auto order = lexbfs(g);
    std::reverse(order.begin(), order.end());
    auto chk = check_peo(g, order);
    ChordalityVerdict out;
    if (chk.valid) {
        out.chordal = true;
        out.ordering = std::move(chk.ordering);
        return out;
    }
    out.chordal = false;
    if (auto hole = detail::hole_through(g, chk.bad_v, chk.bad_x, chk.bad_y)) {
        out.chordless_cycle = *hole;
        return out;
    }
    // Every hole (c1..ck) is discoverable from the triple (c1, c2, ck), so this
    // sweep always lands on one for a non-chordal graph.
    for (std::size_t v = 0; v < g.vertices(); ++v)
        for (std::size_t x = 0; x < g.vertices(); ++x)
            for (std::size_t y = x + 1; y < g.vertices(); ++y) {
                if (x == v || y == v || !g.adjacent(v, x) || !g.adjacent(v, y) ||
                    g.adjacent(x, y))
                    continue;
                if (auto hole = detail::hole_through(g, v, x, y)) {
                    out.chordless_cycle = *hole;
                    return out;
                }
            }
    throw internal_error("chordality check failed to produce a certificate");
}

/// Closed later-neighborhood cliques along a PEO, one per vertex.
inline std::vector<std::vector<std::size_t>> peo_cliques(const Graph& g,
                                                         const EliminationOrdering& peo) {
    std::vector<std::vector<std::size_t>> cliques;
    for (std::size_t k = 0; k < peo.ordering.size(); ++k) {
        std::vector<std::size_t> c{peo.ordering[k]};
        c.insert(c.end(), peo.simplicial_witness[k].begin(), peo.simplicial_witness[k].end());
        std::sort(c.begin(), c.end());
        if (!g.is_clique(c)) throw internal_error("peo witness is not a clique");
        cliques.push_back(std::move(c));
    }
    return cliques;
}

/// Maximal cliques of a chordal graph: the PEO cliques with contained ones removed.
inline std::vector<std::vector<std::size_t>> maximal_cliques(const Graph& g,
                                                             const EliminationOrdering& peo) {
    auto cliques = peo_cliques(g, peo);
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : cliques) {
        bool contained = false;
        for (const auto& d : cliques)
            if (d != c && std::includes(d.begin(), d.end(), c.begin(), c.end())) contained = true;
        if (!contained && std::find(out.begin(), out.end(), c) == out.end())
            out.push_back(c);
    }
    return out;
}

/// Clique tree of a chordal graph: maximum-intersection spanning tree over the
/// maximal cliques (Prim, deterministic lowest-index tie-break). parent[0] is
/// the root and refers to itself.
struct CliqueTree {
    std::vector<std::vector<std::size_t>> cliques;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> visit_order;  // root first, running-intersection order
};

inline CliqueTree clique_tree(const Graph& g, const EliminationOrdering& peo) {
    CliqueTree t;
    t.cliques = maximal_cliques(g, peo);
    const std::size_t m = t.cliques.size();
    t.parent.assign(m, 0);
    std::vector<bool> in_tree(m, false);
    in_tree[0] = true;
    t.visit_order.push_back(0);
    for (std::size_t step = 1; step < m; ++step) {
        std::size_t best = m, best_from = m;
        std::size_t best_overlap = 0;
        bool found = false;
        for (std::size_t c = 0; c < m; ++c) {
            if (in_tree[c]) continue;
            for (std::size_t d = 0; d < m; ++d) {
                if (!in_tree[d]) continue;
                std::vector<std::size_t> inter;
                std::set_intersection(t.cliques[c].begin(), t.cliques[c].end(),
                                      t.cliques[d].begin(), t.cliques[d].end(),
                                      std::back_inserter(inter));
                if (!found || inter.size() > best_overlap ||
                    (inter.size() == best_overlap && (c < best || (c == best && d < best_from)))) {
                    found = true;
                    best_overlap = inter.size();
                    best = c;
                    best_from = d;
                }
            }
        }
        in_tree[best] = true;
        t.parent[best] = best_from;
        t.visit_order.push_back(best);
    }
    return t;
}

}  // namespace opsys
