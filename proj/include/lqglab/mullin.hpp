#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lattice_walks.hpp"
#include "planar_map.hpp"

namespace lqglab {

struct TreeDecoratedMap {
    PlanarMap map;
    std::vector<char> in_tree;  // per half-edge, symmetric under twin

    int tree_size() const {
        int c = 0;
        for (int h = 0; h < map.size(); ++h) c += in_tree[h];
        return c / 2;
    }

    // Throws unless the marked edges form a spanning tree.
    void validate() const {
        if (int(in_tree.size()) != map.size()) throw MapError("tree mask size");
        for (int h = 0; h < map.size(); ++h)
            if (in_tree[h] != in_tree[map.twin(h)]) throw MapError("tree mask not symmetric");
        if (tree_size() != map.vertex_count() - 1) throw MapError("tree not spanning");
        std::vector<int> parent(map.vertex_count());
        for (int v = 0; v < map.vertex_count(); ++v) parent[v] = v;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        for (int h = 0; h < map.size(); ++h)
            if (in_tree[h] && h < map.twin(h)) {
                int a = find(map.origin(h)), b = find(map.target(h));
                if (a == b) throw MapError("tree not spanning");
                parent[a] = b;
            }
    }

    void write(std::ostream& os) const {
        map.write(os);
        os << "TREE v1 " << tree_size() << '\n';
        for (int h = 0; h < map.size(); ++h)
            if (in_tree[h] && h < map.twin(h)) os << h << '\n';
    }
};

// T with its two trees. Triangle k (1-based step) owns half-edges 3(k-1)+{0,1,2}:
// in-side v->f, then f->x and x->v, counterclockwise with the triangle on the left.
struct RefinedTriangulation {
    PlanarMap tri;
    std::vector<char> primal;       // per vertex of tri
    std::vector<char> primal_tree;  // per half-edge
    std::vector<char> dual_tree;    // per half-edge
    std::vector<int> edge_sequence; // e_0 .. e_2n; e_2n is the twin of e_0

    int steps() const { return tri.size() / 3; }
};

namespace detail {

// next(g) for a map given as counterclockwise triangles 3t, 3t+1, 3t+2.
inline std::vector<int> triangle_rotation(const std::vector<int>& twin) {
    std::vector<int> next(twin.size());
    for (std::size_t g = 0; g < twin.size(); ++g) {
        std::size_t t = g / 3, i = g % 3;
        next[g] = twin[3 * t + (i + 2) % 3];
    }
    return next;
}

}  // namespace detail

inline RefinedTriangulation sew_walk_to_refined(const LatticeWalk& w) {
    using namespace mullin_step;
    if (w.step_set.name != "mullin" || !w.is_quadrant_excursion({0, 0}) || w.start != Point{0, 0})
        throw WalkError("walk not an excursion");
    const int n2 = w.length();
    if (n2 == 0) throw WalkError("empty walk");
    std::vector<int> twin(3 * n2, -1);
    std::vector<int> corner(3 * n2);  // vertex label of each half-edge origin; primal >= 0, dual < 0
    std::vector<char> ptree(3 * n2, 0), dtree(3 * n2, 0);
    struct Pending {
        int he, vertex;
    };
    std::vector<Pending> Ls, Rs;
    int v = 0, f = -1, next_primal = 1, next_dual = -2;
    int out = -1;
    RefinedTriangulation r;
    r.edge_sequence.push_back(0);
    auto link = [&](int a, int b) { twin[a] = b, twin[b] = a; };
    for (int t = 0; t < n2; ++t) {
        const int in = 3 * t, s1 = 3 * t + 1, s2 = 3 * t + 2;
        if (t > 0) link(in, out);
        int x;
        switch (w.steps[t]) {
            case up:
                x = next_primal++;
                Ls.push_back({s2, v});
                ptree[s2] = 1;
                out = s1;
                break;
            case down:
                x = Ls.back().vertex;
                link(s2, Ls.back().he);
                ptree[s2] = 1;
                Ls.pop_back();
                out = s1;
                break;
            case right:
                x = next_dual--;
                Rs.push_back({s1, f});
                dtree[s1] = 1;
                out = s2;
                break;
            default:
                x = Rs.back().vertex;
                link(s1, Rs.back().he);
                dtree[s1] = 1;
                Rs.pop_back();
                out = s2;
                break;
        }
        corner[in] = v, corner[s1] = f, corner[s2] = x;
        if (w.steps[t] == up || w.steps[t] == down)
            v = x;
        else
            f = x;
        r.edge_sequence.push_back(out);
    }
    link(out, 0);
    r.tri = PlanarMap::from_permutations(twin, detail::triangle_rotation(twin), 0);
    r.primal.assign(r.tri.vertex_count(), 0);
    for (int h = 0; h < r.tri.size(); ++h) r.primal[r.tri.origin(h)] = corner[h] >= 0;
    r.primal_tree = ptree;
    r.dual_tree = dtree;
    return r;
}

inline void validate_refined(const RefinedTriangulation& r) {
    const auto& T = r.tri;
    if (T.size() % 3 || T.genus() != 0) throw MapError("malformed refinement");
    for (int h = 0; h < T.size(); ++h) {
        if (r.primal_tree[h] != r.primal_tree[T.twin(h)] || r.dual_tree[h] != r.dual_tree[T.twin(h)])
            throw MapError("malformed refinement: tree mask");
        bool po = r.primal[T.origin(h)], pt = r.primal[T.target(h)];
        if (r.primal_tree[h] && !(po && pt)) throw MapError("malformed refinement: primal tree edge");
        if (r.dual_tree[h] && (po || pt)) throw MapError("malformed refinement: dual tree edge");
        if (!r.primal_tree[h] && !r.dual_tree[h] && po == pt) throw MapError("malformed refinement: unclassified edge");
    }
    for (int f = 0; f < T.face_count(); ++f) {
        if (T.face_degree(f) != 3) throw MapError("malformed refinement: face not a triangle");
        int trees = 0;
        for (int h : T.face_boundary(f)) trees += r.primal_tree[h] + r.dual_tree[h];
        if (trees != 1) throw MapError("malformed refinement: triangle tree count");
    }
}

// Primal map and tree. Around each primal vertex, a primal tree half-edge of T
// maps to itself; a triangle whose far side is a dual tree edge contributes the
// primal edge crossing that dual edge.
inline TreeDecoratedMap extract_tree_map(const RefinedTriangulation& r) {
    validate_refined(r);
    const auto& T = r.tri;
    std::vector<int> id_of_he(T.size(), -1), id_of_face(T.face_count(), -1);
    std::vector<int> next, twin_key;  // filled per emission
    struct Emit {
        bool tree;
        int key;  // T half-edge for tree, T face for crossing
    };
    std::vector<Emit> emits;
    std::vector<int> origin;
    int root = -1;
    // start each rotation at the half-edge that sewing made e_0 when possible
    for (int v = 0; v < T.vertex_count(); ++v) {
        if (!r.primal[v]) continue;
        const auto& ar = T.around(v);
        int start = ar.front();
        if (v == T.origin(r.edge_sequence.front())) start = r.edge_sequence.front();
        int first = -1, prev = -1;
        int g = start;
        do {
            auto push = [&](Emit e) {
                int id = int(emits.size());
                emits.push_back(e);
                next.push_back(-1);
                if (prev >= 0) next[prev] = id;
                if (first < 0) first = id;
                prev = id;
                if (e.tree) id_of_he[e.key] = id;
                else id_of_face[e.key] = id;
            };
            if (r.primal_tree[g]) push({true, g});
            int far = T.left_next(g);
            if (r.dual_tree[far]) push({false, T.face(T.twin(g))});
            g = T.next(g);
        } while (g != start);
        if (first < 0) throw MapError("malformed refinement: isolated primal vertex");
        next[prev] = first;
        if (v == T.origin(r.edge_sequence.front())) root = first;
    }
    std::vector<int> twin(emits.size());
    for (std::size_t i = 0; i < emits.size(); ++i) {
        if (emits[i].tree) {
            twin[i] = id_of_he[T.twin(emits[i].key)];
        } else {
            // the triangle on the other side of the dual tree edge
            int f = emits[i].key;
            int far = -1;
            for (int h : T.face_boundary(f))
                if (r.dual_tree[h]) far = h;
            twin[i] = id_of_face[T.face(T.twin(far))];
        }
    }
    TreeDecoratedMap d;
    d.map = PlanarMap::from_permutations(twin, next, root);
    d.in_tree.assign(emits.size(), 0);
    for (std::size_t i = 0; i < emits.size(); ++i) d.in_tree[i] = emits[i].tree;
    d.validate();
    return d;
}

// Contour of the spanning tree from the root: a tree edge is up when first
// crossed and down when crossed back; a non-tree edge is right when first met
// and left when met again from its other endpoint.
inline LatticeWalk map_tree_to_walk(const TreeDecoratedMap& d) {
    using namespace mullin_step;
    d.validate();
    const auto& M = d.map;
    std::vector<char> seen(M.size(), 0);
    LatticeWalk w{StepSet::mullin(), {0, 0}, {}};
    int h = M.root();
    for (int k = 0; k < M.size(); ++k) {
        bool first = !seen[h] && !seen[M.twin(h)];
        seen[h] = 1;
        if (d.in_tree[h]) {
            w.steps.push_back(first ? up : down);
            h = M.next(M.twin(h));
        } else {
            w.steps.push_back(first ? right : left);
            h = M.next(h);
        }
    }
    if (!w.is_quadrant_excursion({0, 0})) throw MapError("contour is not an excursion");
    return w;
}

inline RefinedTriangulation refine(const TreeDecoratedMap& d) { return sew_walk_to_refined(map_tree_to_walk(d)); }

// Faces of T in sewing order; face k and k+1 share e_k.
inline std::vector<int> peano_order(const RefinedTriangulation& r) {
    std::vector<int> out;
    for (int t = 0; t < r.steps(); ++t) out.push_back(r.tri.face(r.tri.twin(3 * t)));
    return out;
}

}  // namespace lqglab
