#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <vector>

#include "lattice_walks.hpp"
#include "planar_map.hpp"

namespace lqglab {

struct PercolatedTriangulation {
    DiskTriangulation tri;
    SiteColoring coloring;

    void write(std::ostream& os) const {
        tri.map.write(os);
        os << "COLORS v1\n";
        for (int v = 0; v < tri.map.vertex_count(); ++v)
            os << v << ' ' << (coloring.colors[v] == Color::blue ? 'b' : 'y') << '\n';
    }
};

namespace kreweras_step {
constexpr int north = 0, east = 1, zip = 2;  // (0,1), (1,0), (-1,-1)
}

// Walk from (l,0) to (0,0) -> percolated type II triangulation of an (l+2)-gon.
//
// The unfilled region is bounded by a frontier of tokens; each token is an edge
// o->d whose outside half-edge already exists. Polygon vertices are 0..l+1 with
// X = (0,1) parked, L = (1,2)..(l,l+1) and the active edge (l+1,0).
//   (1,0): triangle on the active edge with a fresh apex; push its left side on
//          L and continue on its right side.
//   (0,1): the same, pushing the right side on R and continuing on the left.
//   (-1,-1): glue the active edge to whichever stack top was pushed earlier and
//          continue from the other top. A left glue closes the active origin,
//          which becomes blue; a right glue closes the active target, yellow.
// Finally the active edge is glued to X. The root is the inner half-edge 0->1.
inline PercolatedTriangulation sew_walk_to_percolated(const LatticeWalk& w, int l) {
    using namespace kreweras_step;
    if (l < 0) throw WalkError("negative perimeter parameter");
    if (w.step_set.name != "kreweras" || w.start != Point{l, 0} || !w.is_quadrant_excursion({0, 0}))
        throw WalkError("walk leaves quadrant or wrong endpoints");
    if (l == 0 && w.steps.empty()) throw WalkError("empty walk with l = 0 is not a triangulation");

    const int P = l + 2;
    std::vector<int> twin, fprev;
    std::vector<int> parent;  // union-find over provisional vertex labels
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    auto new_vertex = [&] {
        parent.push_back(int(parent.size()));
        return int(parent.size()) - 1;
    };
    std::vector<int> origin;
    auto new_he = [&](int o) {
        twin.push_back(-1), fprev.push_back(-1), origin.push_back(o);
        return int(twin.size()) - 1;
    };
    for (int i = 0; i < P; ++i) new_vertex();
    std::vector<int> poly(P);
    for (int i = 0; i < P; ++i) poly[i] = new_he((i + 1) % P);
    for (int i = 0; i < P; ++i) fprev[poly[i]] = poly[(i + 1) % P];

    struct Token {
        int o, d, he, time;
    };
    auto glue = [&](const Token& a, const Token& b) {
        twin[a.he] = b.he, twin[b.he] = a.he;
        parent[find(a.o)] = find(b.d);
        parent[find(a.d)] = find(b.o);
    };
    std::vector<Token> L, R;
    for (int i = 1; i <= P - 2; ++i) L.push_back({i, i + 1, poly[i], -1});
    Token X{0, 1, poly[0], -1}, e{P - 1, 0, poly[P - 1], -1};
    std::vector<std::pair<int, Color>> closed;

    for (int t = 0; t < w.length(); ++t) {
        const int s = w.steps[t];
        if (s == zip) {
            if (L.back().time < R.back().time) {
                closed.push_back({e.o, Color::blue});
                glue(e, L.back());
                L.pop_back();
                e = R.back();
                R.pop_back();
            } else {
                closed.push_back({e.d, Color::yellow});
                glue(e, R.back());
                R.pop_back();
                e = L.back();
                L.pop_back();
            }
        } else {
            int apex = new_vertex();
            int h0 = new_he(e.o), h1 = new_he(e.d), h2 = new_he(apex);
            twin[h0] = e.he, twin[e.he] = h0;
            fprev[h0] = h2, fprev[h1] = h0, fprev[h2] = h1;
            Token left{e.o, apex, h2, t}, right{apex, e.d, h1, t};
            if (s == east) {
                L.push_back(left);
                e = right;
            } else {
                R.push_back(right);
                e = left;
            }
        }
    }
    glue(e, X);

    std::vector<int> next(twin.size());
    for (std::size_t g = 0; g < twin.size(); ++g) next[g] = twin[fprev[g]];
    PercolatedTriangulation out;
    out.tri = DiskTriangulation::from_map(PlanarMap::from_permutations(twin, next, twin[poly[0]]));
    const auto& m = out.tri.map;
    if (out.tri.perimeter != P) throw MapError("perimeter mismatch");

    std::vector<int> label_to_vertex(parent.size(), -1);
    for (std::size_t h = 0; h < twin.size(); ++h) {
        int r = find(origin[h]);
        if (label_to_vertex[r] >= 0 && label_to_vertex[r] != m.origin(int(h))) throw MapError("sewing inconsistency");
        label_to_vertex[r] = m.origin(int(h));
    }
    auto bmask = out.tri.boundary_mask();
    out.coloring.colors.assign(m.vertex_count(), Color::blue);
    std::vector<char> colored(m.vertex_count(), 0);
    for (auto [lab, c] : closed) {
        int v = label_to_vertex[find(lab)];
        if (bmask[v] && c != Color::blue) throw MapError("boundary vertex closed yellow");
        out.coloring.colors[v] = c;
        colored[v] = 1;
    }
    for (int v = 0; v < m.vertex_count(); ++v)
        if (!bmask[v] && !colored[v]) throw MapError("interior vertex left uncolored");
    return out;
}

struct ColorHistogram {
    int blue = 0, yellow = 0;
};

inline ColorHistogram interior_color_histogram(const PercolatedTriangulation& p) {
    ColorHistogram h;
    auto b = p.tri.boundary_mask();
    for (int v = 0; v < p.tri.map.vertex_count(); ++v)
        if (!b[v]) (p.coloring.colors[v] == Color::blue ? h.blue : h.yellow)++;
    return h;
}

// Boltzmann sampler restricted to triangulations with at most max_vertices
// vertices. The size d (vertices minus two) is drawn from the exact law
// P(d) ∝ P(uniform-step walk of length 3d-l is an excursion), then the walk is
// drawn uniformly among excursions of that length.
class BoltzmannPercolated {
public:
    BoltzmannPercolated(int l, int max_vertices) : l_(l) {
        if (l < 0) throw WalkError("negative perimeter parameter");
        dmax_ = max_vertices - 2;
        int dmin = std::max(l, 1);
        if (dmax_ < dmin) throw WalkError("max_vertices too small");
        const int mmax = 3 * dmax_ - l;
        // forward probability mass of uniform-step walks kept in the quadrant
        const int B = l + mmax + 2;
        std::vector<double> cur(std::size_t(B) * B, 0.0), nxt(cur.size());
        cur[std::size_t(l) * B] = 1.0;
        std::vector<double> at_origin(mmax + 1, 0.0);
        at_origin[0] = cur[0];
        auto K = StepSet::kreweras();
        for (int m = 1; m <= mmax; ++m) {
            std::fill(nxt.begin(), nxt.end(), 0.0);
            for (int x = 0; x < B; ++x)
                for (int y = 0; y < B; ++y) {
                    double v = cur[std::size_t(x) * B + y];
                    if (v == 0) continue;
                    for (auto s : K.steps) {
                        int a = x + s.x, b = y + s.y;
                        if (a < 0 || b < 0 || a >= B || b >= B) continue;
                        nxt[std::size_t(a) * B + b] += v / 3.0;
                    }
                }
            std::swap(cur, nxt);
            at_origin[m] = cur[0];
        }
        for (int d = dmin; d <= dmax_; ++d) {
            sizes_.push_back(d);
            weight_.push_back(at_origin[3 * d - l]);
        }
        cum_.resize(weight_.size());
        std::partial_sum(weight_.begin(), weight_.end(), cum_.begin());
    }

    int l() const { return l_; }
    const std::vector<int>& sizes() const { return sizes_; }
    // unnormalized law of d; weight(d) = count(3d-l) * 3^-(3d-l)
    const std::vector<double>& size_weights() const { return weight_; }

    LatticeWalk sample_walk(Philox& g) const {
        double u = uniform01(g) * cum_.back();
        std::size_t i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        if (i >= cum_.size()) i = cum_.size() - 1;
        int d = sizes_[i], m = 3 * d - l_;
        const BackwardSampler* s;
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = cache_.find(m);
            if (it == cache_.end())
                it = cache_.emplace(m, std::make_unique<BackwardSampler>(StepSet::kreweras(), m, Point{l_, 0}, Point{0, 0}))
                         .first;
            s = it->second.get();
        }
        return (*s)(g);
    }

    PercolatedTriangulation operator()(Philox& g) const { return sew_walk_to_percolated(sample_walk(g), l_); }

private:
    int l_, dmax_;
    std::vector<int> sizes_;
    std::vector<double> weight_, cum_;
    mutable std::mutex mu_;
    mutable std::map<int, std::unique_ptr<BackwardSampler>> cache_;
};

inline PercolatedTriangulation sample_boltzmann_percolated(int l, Philox& g, int max_vertices = 64) {
    return BoltzmannPercolated(l, max_vertices)(g);
}

}  // namespace lqglab
