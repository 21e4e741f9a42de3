#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "planar_map.hpp"
#include "rng.hpp"

namespace lqglab {

// Three boundary edges in counterclockwise order. Each is stored as the
// boundary half-edge with the disk on its left.
struct BoundaryArcs {
    int a = -1, b = -1, c = -1;
    enum Arc : std::int8_t { none = -1, ab = 0, bc = 1, ca = 2 };
    std::vector<std::int8_t> arc_of;  // per vertex

    BoundaryArcs() = default;

    BoundaryArcs(const DiskTriangulation& t, int ea, int eb, int ec) {
        auto bd = t.boundary();
        std::vector<int> pos(t.map.size(), -1);
        for (std::size_t i = 0; i < bd.size(); ++i) pos[bd[i]] = int(i);
        auto norm = [&](int h) {
            if (h < 0 || h >= t.map.size()) throw std::invalid_argument("invalid arcs: bad edge id");
            if (pos[h] >= 0) return h;
            if (pos[t.map.twin(h)] >= 0) return t.map.twin(h);
            throw std::invalid_argument("invalid arcs: edge not on the outer face");
        };
        a = norm(ea), b = norm(eb), c = norm(ec);
        if (a == b || b == c || a == c) throw std::invalid_argument("invalid arcs: edges not distinct");
        const int P = int(bd.size());
        int ib = (pos[b] - pos[a] + P) % P, ic = (pos[c] - pos[a] + P) % P;
        if (!(ib < ic)) throw std::invalid_argument("invalid arcs: not counterclockwise");
        arc_of.assign(t.map.vertex_count(), none);
        // vertex after half-edge i is the origin of bd[i+1]
        for (int k = 1; k <= P; ++k) {
            int v = t.map.origin(bd[(pos[a] + k) % P]);
            arc_of[v] = k <= ib ? ab : (k <= ic ? bc : ca);
        }
    }

    // (a,b,c) -> (b,c,a)
    BoundaryArcs rotated() const {
        BoundaryArcs r = *this;
        r.a = b, r.b = c, r.c = a;
        for (auto& x : r.arc_of)
            if (x != none) x = std::int8_t((x + 2) % 3);
        return r;
    }
};

namespace detail {

// Edge-to-block labels of an undirected multigraph (Hopcroft-Tarjan).
struct Biconnected {
    int n;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::vector<std::pair<int, int>>> adj;

    explicit Biconnected(int n_) : n(n_), adj(n_) {}

    int add(int u, int v) {
        edges.push_back({u, v});
        int id = int(edges.size()) - 1;
        adj[u].push_back({v, id});
        adj[v].push_back({u, id});
        return id;
    }

    std::vector<int> blocks(int root) const {
        std::vector<int> disc(n, -1), low(n, 0), block(edges.size(), -1), stack;
        int timer = 0, nb = 0;
        struct Frame {
            int u, pe;
            std::size_t i;
        };
        std::vector<Frame> st{{root, -1, 0}};
        disc[root] = low[root] = timer++;
        while (!st.empty()) {
            auto& fr = st.back();
            if (fr.i < adj[fr.u].size()) {
                auto [v, id] = adj[fr.u][fr.i++];
                if (id == fr.pe) continue;
                if (disc[v] < 0) {
                    stack.push_back(id);
                    disc[v] = low[v] = timer++;
                    st.push_back({v, id, 0});
                } else if (disc[v] < disc[fr.u]) {
                    stack.push_back(id);
                    low[fr.u] = std::min(low[fr.u], disc[v]);
                }
            } else {
                int u = fr.u, pe = fr.pe;
                st.pop_back();
                if (st.empty()) break;
                int p = st.back().u;
                low[p] = std::min(low[p], low[u]);
                if (low[u] >= disc[p]) {
                    for (;;) {
                        int id = stack.back();
                        stack.pop_back();
                        block[id] = nb;
                        if (id == pe) break;
                    }
                    ++nb;
                }
            }
        }
        return block;
    }
};

}  // namespace detail

// Crossing events on a fixed disk triangulation. E_a(v): some simple path with
// one endpoint in (c,a), one in (a,b), all other vertices inner and blue, and at
// least one inner vertex, has v on it or on the side of edge a.
class CrossingEvents {
public:
    CrossingEvents(const DiskTriangulation& t, const BoundaryArcs& arcs) : t_(t), arcs_(arcs) {
        const auto& m = t.map;
        nb_.resize(m.vertex_count());
        for (int h = 0; h < m.size(); ++h) nb_[m.origin(h)].push_back(m.target(h));
        inner_.assign(m.vertex_count(), 1);
        for (int v = 0; v < m.vertex_count(); ++v)
            if (arcs.arc_of[v] != BoundaryArcs::none) inner_[v] = 0;
    }

    const DiskTriangulation& triangulation() const { return t_; }
    const BoundaryArcs& arcs() const { return arcs_; }

    // which = 0, 1, 2 for E_a, E_b, E_c; returns membership per vertex.
    std::vector<char> region(const std::vector<Color>& col, int which) const {
        const int from = (which + 2) % 3, to = which, far = (which + 1) % 3;  // (c,a), (a,b), (b,c) for E_a
        const auto& m = t_.map;
        const int V = m.vertex_count();
        std::vector<int> cl(V, -1);
        std::vector<std::vector<int>> clusters;
        for (int v = 0; v < V; ++v) {
            if (!inner_[v] || col[v] != Color::blue || cl[v] >= 0) continue;
            int id = int(clusters.size());
            clusters.emplace_back();
            std::vector<int> st{v};
            cl[v] = id;
            while (!st.empty()) {
                int u = st.back();
                st.pop_back();
                clusters[id].push_back(u);
                for (int w : nb_[u])
                    if (inner_[w] && col[w] == Color::blue && cl[w] < 0) cl[w] = id, st.push_back(w);
            }
        }
        std::vector<char> barrier(V, 0), wall(m.size(), 0);
        bool any = false;
        std::vector<int> local(V, -1);
        for (auto& C : clusters) {
            bool hit_from = false, hit_to = false;
            for (int u : C)
                for (int h : m.around(u)) {
                    hit_from |= arcs_.arc_of[m.target(h)] == from;
                    hit_to |= arcs_.arc_of[m.target(h)] == to;
                }
            if (!hit_from || !hit_to) continue;
            any = true;
            // cluster vertices, one node per cluster-to-arc half-edge, then s and t;
            // a vertex or edge lies on a qualifying path iff it shares a block with s-t
            for (std::size_t i = 0; i < C.size(); ++i) local[C[i]] = int(i);
            const int k = int(C.size());
            struct Pending {
                int u, w, side, he;
            };
            std::vector<Pending> pending;
            int ncopies = 0;
            for (int u : C)
                for (int h : m.around(u)) {
                    int w = m.target(h);
                    if (inner_[w]) {
                        if (cl[w] == cl[u] && h < m.twin(h)) pending.push_back({local[u], local[w], -1, h});
                    } else if (arcs_.arc_of[w] == from || arcs_.arc_of[w] == to) {
                        pending.push_back({local[u], w, arcs_.arc_of[w] == from ? 0 : 1, h});
                        ++ncopies;
                    }
                }
            detail::Biconnected g(k + ncopies + 2);
            const int s = k + ncopies, tt = s + 1;
            std::vector<int> copy_vertex, edge_he;
            int next_copy = k;
            for (auto& p : pending) {
                if (p.side < 0) {
                    g.add(p.u, p.w);
                    edge_he.push_back(p.he);
                } else {
                    int c = next_copy++;
                    copy_vertex.push_back(p.w);
                    g.add(p.u, c);
                    edge_he.push_back(p.he);
                    g.add(c, p.side == 0 ? s : tt);
                    edge_he.push_back(-1);
                }
            }
            int st_edge = g.add(s, tt);
            edge_he.push_back(-1);
            auto blk = g.blocks(s);
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                if (blk[e] != blk[st_edge]) continue;
                if (edge_he[e] >= 0) wall[edge_he[e]] = wall[m.twin(edge_he[e])] = 1;
                for (int x : g.edges[e]) {
                    if (x < k) barrier[C[x]] = 1;
                    else if (x < s) barrier[copy_vertex[x - k]] = 1;
                }
            }
            for (int u : C) local[u] = -1;
        }
        std::vector<char> out(V, 0);
        if (!any) return out;
        // faces on the far side of every qualifying path
        std::vector<char> seen(m.face_count(), 0);
        seen[t_.outer_face] = 1;
        std::vector<int> st;
        for (int h = 0; h < m.size(); ++h) {
            int f = m.face(h);
            if (arcs_.arc_of[m.origin(h)] == far && !seen[f]) seen[f] = 1, st.push_back(f);
        }
        while (!st.empty()) {
            int f = st.back();
            st.pop_back();
            for (int h : m.face_boundary(f)) {
                if (wall[h]) continue;
                int g2 = m.face(m.twin(h));
                if (!seen[g2]) seen[g2] = 1, st.push_back(g2);
            }
        }
        for (int v = 0; v < V; ++v) out[v] = 1;
        for (int h = 0; h < m.size(); ++h) {
            int v = m.origin(h);
            if (!barrier[v] && m.face(h) != t_.outer_face && seen[m.face(h)]) out[v] = 0;
        }
        return out;
    }

    // Exhaustive simple-path search; exponential, for small maps only.
    std::vector<char> region_oracle(const std::vector<Color>& col, int which) const {
        const auto& m = t_.map;
        const int from = (which + 2) % 3, to = which;
        const int edge_h = which == 0 ? arcs_.a : (which == 1 ? arcs_.b : arcs_.c);
        const int V = m.vertex_count();
        std::vector<char> out(V, 0), on_path(V, 0), path_edge(m.size(), 0);
        std::vector<int> path_he;
        auto mark = [&] {
            // faces reachable from the triangle inside edge a without crossing the path
            std::vector<char> seen(m.face_count(), 0);
            int f0 = m.face(m.twin(edge_h));
            std::vector<int> st{f0};
            seen[f0] = 1;
            seen[t_.outer_face] = 1;
            while (!st.empty()) {
                int f = st.back();
                st.pop_back();
                for (int h : m.face_boundary(f)) {
                    if (path_edge[h]) continue;
                    int g = m.face(m.twin(h));
                    if (!seen[g]) seen[g] = 1, st.push_back(g);
                }
            }
            for (int h = 0; h < m.size(); ++h)
                if (m.face(h) != t_.outer_face && seen[m.face(h)]) out[m.origin(h)] = 1;
            for (int v = 0; v < V; ++v)
                if (on_path[v]) out[v] = 1;
        };
        std::function<void(int)> extend = [&](int u) {
            for (int h : m.around(u)) {
                int w = m.target(h);
                if (on_path[w]) continue;
                bool last = arcs_.arc_of[w] == to;
                bool inner_blue = inner_[w] && col[w] == Color::blue;
                if (!last && !inner_blue) continue;
                if (last && path_he.empty()) continue;  // no inner vertex
                path_edge[h] = path_edge[m.twin(h)] = 1;
                path_he.push_back(h);
                on_path[w] = 1;
                if (last) mark();
                else extend(w);
                on_path[w] = 0;
                path_he.pop_back();
                path_edge[h] = path_edge[m.twin(h)] = 0;
            }
        };
        for (int x = 0; x < V; ++x) {
            if (arcs_.arc_of[x] != from) continue;
            on_path[x] = 1;
            extend(x);
            on_path[x] = 0;
        }
        return out;
    }

private:
    const DiskTriangulation& t_;
    BoundaryArcs arcs_;
    std::vector<std::vector<int>> nb_;
    std::vector<char> inner_;
};

inline bool event_Ea(const DiskTriangulation& t, const SiteColoring& c, const BoundaryArcs& arcs, int v) {
    if (v < 0 || v >= t.map.vertex_count()) throw std::invalid_argument("invalid vertex");
    return CrossingEvents(t, arcs).region(c.colors, 0)[v];
}

struct EmbeddedMap {
    std::vector<std::array<double, 3>> positions;
    std::vector<double> stderr_;
    std::vector<char> degenerate;  // all three estimates zero
    long samples_used = 0;
    double n_scale = 1.0;

    // Barycentric -> plane, corners (0,0), (1,0), (1/2, sqrt(3)/2).
    static std::array<double, 2> to_plane(const std::array<double, 3>& p) {
        return {p[1] + 0.5 * p[2], 0.5 * std::sqrt(3.0) * p[2]};
    }
};

namespace detail {

inline EmbeddedMap normalize_counts(const std::vector<std::array<double, 3>>& prob, double K) {
    EmbeddedMap e;
    const std::size_t V = prob.size();
    e.positions.resize(V);
    e.stderr_.assign(V, 0.0);
    e.degenerate.assign(V, 0);
    for (std::size_t v = 0; v < V; ++v) {
        const auto& p = prob[v];
        double S = p[0] + p[1] + p[2];
        if (S <= 0) {
            e.degenerate[v] = 1;
            e.positions[v] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
            continue;
        }
        for (int i = 0; i < 3; ++i) e.positions[v][i] = p[i] / S;
        if (K > 0) {
            // delta method with independent binomial estimates
            double worst = 0;
            for (int i = 0; i < 3; ++i) {
                double var = 0;
                for (int j = 0; j < 3; ++j) {
                    double d = ((i == j ? S : 0.0) - p[i]) / (S * S);
                    var += d * d * p[j] * (1 - p[j]) / K;
                }
                worst = std::max(worst, std::sqrt(var));
            }
            e.stderr_[v] = worst;
        }
    }
    return e;
}

}  // namespace detail

inline double default_n_scale(const DiskTriangulation& t) {
    double l = t.perimeter - 2;
    return std::max(1.0, l * l);
}

inline EmbeddedMap cardy_smirnov_embed(const DiskTriangulation& t, const BoundaryArcs& arcs, long K, std::uint64_t seed,
                                       int threads = 1) {
    if (K < 1) throw std::invalid_argument("K must be positive");
    CrossingEvents ev(t, arcs);
    const int V = t.map.vertex_count();
    auto bmask = t.boundary_mask();
    threads = std::max(1, threads);
    std::vector<std::vector<std::array<long, 3>>> tally(threads, std::vector<std::array<long, 3>>(V, {0, 0, 0}));
    parallel_for(std::size_t(K), threads, [&](std::size_t k, int w) {
        Philox g(seed, k);
        std::vector<Color> col(V, Color::blue);
        for (int v = 0; v < V; ++v)
            if (!bmask[v]) col[v] = (g() >> 63) ? Color::yellow : Color::blue;
        for (int i = 0; i < 3; ++i) {
            auto r = ev.region(col, i);
            for (int v = 0; v < V; ++v) tally[w][v][i] += r[v];
        }
    });
    std::vector<std::array<double, 3>> prob(V, {0, 0, 0});
    for (int w = 0; w < threads; ++w)
        for (int v = 0; v < V; ++v)
            for (int i = 0; i < 3; ++i) prob[v][i] += tally[w][v][i];
    for (auto& p : prob)
        for (auto& x : p) x /= double(K);
    auto e = detail::normalize_counts(prob, double(K));
    e.samples_used = K;
    e.n_scale = default_n_scale(t);
    return e;
}

// Exact event probabilities by enumerating every interior coloring.
inline EmbeddedMap cardy_smirnov_exact(const DiskTriangulation& t, const BoundaryArcs& arcs, bool use_oracle = false) {
    CrossingEvents ev(t, arcs);
    const int V = t.map.vertex_count();
    auto bmask = t.boundary_mask();
    std::vector<int> inner;
    for (int v = 0; v < V; ++v)
        if (!bmask[v]) inner.push_back(v);
    if (inner.size() > 24) throw std::invalid_argument("too many interior vertices for exact enumeration");
    std::vector<std::array<double, 3>> prob(V, {0, 0, 0});
    const std::uint64_t total = 1ull << inner.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::vector<Color> col(V, Color::blue);
        for (std::size_t i = 0; i < inner.size(); ++i)
            if (mask >> i & 1) col[inner[i]] = Color::yellow;
        for (int i = 0; i < 3; ++i) {
            auto r = use_oracle ? ev.region_oracle(col, i) : ev.region(col, i);
            for (int v = 0; v < V; ++v) prob[v][i] += r[v];
        }
    }
    for (auto& p : prob)
        for (auto& x : p) x /= double(total);
    auto e = detail::normalize_counts(prob, 0);
    e.samples_used = long(total);
    e.n_scale = default_n_scale(t);
    return e;
}

using Polygon = std::vector<std::array<double, 2>>;

// Closed polygon: points within 1e-12 of the outline count as inside.
inline bool point_in_polygon(const std::array<double, 2>& p, const Polygon& poly) {
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto &a = poly[i], &b = poly[j];
        double ux = b[0] - a[0], uy = b[1] - a[1], len2 = ux * ux + uy * uy;
        double s = len2 > 0 ? std::clamp(((p[0] - a[0]) * ux + (p[1] - a[1]) * uy) / len2, 0.0, 1.0) : 0.0;
        if (std::hypot(a[0] + s * ux - p[0], a[1] + s * uy - p[1]) < 1e-12) return true;
    }
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto &a = poly[i], &b = poly[j];
        if ((a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
    }
    return in;
}

inline Polygon whole_triangle() { return {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5 * std::sqrt(3.0)}}; }

// n^-1 times the number of embedded vertices in U (plane coordinates).
inline double area_measure(const EmbeddedMap& e, const Polygon& U) {
    if (U.size() < 3) return 0.0;
    long c = 0;
    for (auto& p : e.positions) {
        c += point_in_polygon(EmbeddedMap::to_plane(p), U);
    }
    return c / e.n_scale;
}

inline int nearest_vertex(const EmbeddedMap& e, const std::array<double, 2>& x) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < e.positions.size(); ++v) {
        auto q = EmbeddedMap::to_plane(e.positions[v]);
        double d = std::hypot(q[0] - x[0], q[1] - x[1]);
        if (d < bd) bd = d, best = int(v);
    }
    return best;
}

inline double rescaled_metric(const EmbeddedMap& e, const DiskTriangulation& t, const std::array<double, 2>& x,
                              const std::array<double, 2>& y) {
    int u = nearest_vertex(e, x), v = nearest_vertex(e, y);
    return std::pow(e.n_scale, -0.25) * t.map.bfs_distances(u)[v];
}

// Equilateral patch of the triangular lattice with side N. Vertex (i,j) sits at
// barycentric (1-(i+j)/N, i/N, j/N); a, b, c are the boundary edges leaving the
// corners A=(0,0), B=(N,0), C=(0,N) counterclockwise.
struct LatticeTriangle {
    int N;
    DiskTriangulation disk;
    BoundaryArcs arcs;
    std::vector<std::array<double, 3>> lattice_positions;

    explicit LatticeTriangle(int n) : N(n) {
        if (N < 2) throw std::invalid_argument("lattice triangle needs N >= 2");
        auto id = [&](int i, int j) { return j * (N + 1) - j * (j - 1) / 2 + i; };
        const int V = (N + 1) * (N + 2) / 2;
        std::vector<std::array<int, 3>> tris;
        lattice_positions.resize(V);
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i + j <= N; ++i) {
                lattice_positions[id(i, j)] = {1.0 - double(i + j) / N, double(i) / N, double(j) / N};
                if (i + j + 1 <= N) tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                if (i + j + 2 <= N) tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        disk = DiskTriangulation::from_triangles(V, tris, id(0, 0), id(1, 0));
        auto he = [&](int u, int v) {
            for (int h : disk.map.around(u))
                if (disk.map.target(h) == v) return h;
            throw MapError("missing lattice edge");
        };
        arcs = BoundaryArcs(disk, he(id(0, 0), id(1, 0)), he(id(N, 0), id(N - 1, 1)), he(id(0, N), id(0, N - 1)));
    }
};

struct Interface {
    std::vector<int> faces;                     // inner triangles crossed, in order
    std::vector<std::pair<int, int>> crossings; // (blue, yellow) endpoints of crossed edges
};

// Color-change loops; with a blue boundary every interface closes up.
inline std::vector<Interface> percolation_interfaces(const DiskTriangulation& t, const SiteColoring& c) {
    const auto& m = t.map;
    auto bi = [&](int h) { return c.colors[m.origin(h)] != c.colors[m.target(h)]; };
    std::vector<char> used(m.size(), 0);
    std::vector<Interface> out;
    for (int h0 = 0; h0 < m.size(); ++h0) {
        if (used[h0] || !bi(h0) || m.face(h0) == t.outer_face) continue;
        Interface I;
        int h = h0;
        while (!used[h]) {
            used[h] = used[m.twin(h)] = 1;
            int f = m.face(h);
            if (f == t.outer_face) throw MapError("interface reaches the boundary");
            I.faces.push_back(f);
            int a = m.origin(h), b = m.target(h);
            I.crossings.push_back(c.colors[a] == Color::blue ? std::pair{a, b} : std::pair{b, a});
            int exit = -1;
            for (int g : m.face_boundary(f))
                if (g != h && bi(g)) exit = g;
            h = m.twin(exit);
        }
        out.push_back(std::move(I));
    }
    return out;
}

}  // namespace lqglab
