#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqglab {

struct MapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HalfEdge {
    int twin;
    int next;  // counterclockwise successor around origin
    int origin;
};

// Rooted map as a rotation system. Faces are the orbits of next∘twin, so face(h)
// is the face to the right of h; the root face is face(root).
class PlanarMap {
public:
    PlanarMap() = default;

    // Validates the table; origins must be constant on next-orbits and dense.
    static PlanarMap build(std::vector<HalfEdge> table, int root) {
        PlanarMap m;
        m.he_ = std::move(table);
        m.root_ = root;
        m.validate(true);
        return m;
    }

    // Origins derived from next-orbits, numbered by smallest half-edge id.
    static PlanarMap from_permutations(const std::vector<int>& twin, const std::vector<int>& next, int root) {
        if (twin.size() != next.size()) throw MapError("invalid id: size mismatch");
        PlanarMap m;
        m.he_.resize(twin.size());
        for (std::size_t i = 0; i < twin.size(); ++i) m.he_[i] = {twin[i], next[i], -1};
        m.root_ = root;
        m.validate(false);
        return m;
    }

    int size() const { return int(he_.size()); }
    int root() const { return root_; }
    int twin(int h) const { return he_[h].twin; }
    int next(int h) const { return he_[h].next; }
    int prev(int h) const { return prev_[h]; }
    int origin(int h) const { return he_[h].origin; }
    int target(int h) const { return he_[he_[h].twin].origin; }
    int face(int h) const { return face_[h]; }
    int face_next(int h) const { return he_[he_[h].twin].next; }  // along the right face
    int left_next(int h) const { return prev_[he_[h].twin]; }     // along the left face
    int vertex_count() const { return nv_; }
    int edge_count() const { return size() / 2; }
    int face_count() const { return nf_; }
    int genus() const { return genus_; }
    int degree(int v) const { return int(vertex_he_[v].size()); }
    int face_degree(int f) const { return int(face_he_[f].size()); }
    // half-edges out of v in ccw order starting from the smallest id
    const std::vector<int>& around(int v) const { return vertex_he_[v]; }
    // half-edges with face f on their right, in face order
    const std::vector<int>& face_boundary(int f) const { return face_he_[f]; }
    const std::vector<HalfEdge>& table() const { return he_; }

    PlanarMap dual() const {
        if (genus_ != 0) throw MapError("dual requires genus 0");
        std::vector<int> t(size()), n(size());
        for (int h = 0; h < size(); ++h) t[h] = twin(h), n[h] = face_next(h);
        return from_permutations(t, n, root_);
    }

    // Same map with the root moved.
    PlanarMap rerooted(int h) const {
        if (h < 0 || h >= size()) throw MapError("invalid id: root");
        PlanarMap m = *this;
        m.root_ = h;
        return m;
    }

    // Breadth-first relabeling from the root; returns label -> old id.
    std::vector<int> bfs_order() const {
        std::vector<int> label(size(), -1), order;
        order.reserve(size());
        label[root_] = 0;
        order.push_back(root_);
        for (std::size_t i = 0; i < order.size(); ++i) {
            int h = order[i];
            for (int g : {twin(h), next(h)})
                if (label[g] < 0) {
                    label[g] = int(order.size());
                    order.push_back(g);
                }
        }
        return order;
    }

    std::string canonical_code() const {
        auto order = bfs_order();
        std::vector<int> label(size());
        for (int i = 0; i < size(); ++i) label[order[i]] = i;
        std::string code;
        code.reserve(8 * size() + 4);
        put_u32(code, std::uint32_t(size()));
        for (int h : order) {
            put_u32(code, std::uint32_t(label[twin(h)]));
            put_u32(code, std::uint32_t(label[next(h)]));
        }
        return code;
    }

    // Vertices in the order their first half-edge appears in bfs_order.
    std::vector<int> vertex_visit_order() const {
        std::vector<int> out;
        std::vector<char> seen(nv_, 0);
        for (int h : bfs_order())
            if (!seen[origin(h)]) {
                seen[origin(h)] = 1;
                out.push_back(origin(h));
            }
        return out;
    }

    std::vector<int> bfs_distances(int v) const {
        if (v < 0 || v >= nv_) throw MapError("invalid vertex");
        std::vector<int> d(nv_, -1);
        std::deque<int> q{v};
        d[v] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int h : vertex_he_[u]) {
                int w = target(h);
                if (d[w] < 0) {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
        return d;
    }

    void write(std::ostream& os) const {
        os << "PMAP v1 " << size() << ' ' << root_ << '\n';
        for (int h = 0; h < size(); ++h) os << h << ' ' << twin(h) << ' ' << next(h) << ' ' << origin(h) << '\n';
    }

    static PlanarMap read(std::istream& is) {
        std::string magic, ver;
        int n = 0, root = 0;
        if (!(is >> magic >> ver >> n >> root) || magic != "PMAP" || ver != "v1" || n < 0)
            throw MapError("bad PMAP header");
        std::vector<HalfEdge> t(n);
        for (int i = 0; i < n; ++i) {
            int id;
            if (!(is >> id >> t[i].twin >> t[i].next >> t[i].origin) || id != i) throw MapError("bad PMAP line");
        }
        return build(std::move(t), root);
    }

private:
    static void put_u32(std::string& s, std::uint32_t x) {
        for (int i = 0; i < 4; ++i) s.push_back(char((x >> (8 * i)) & 0xff));
    }

    void validate(bool check_origin) {
        const int n = size();
        if (n == 0 || n % 2) throw MapError("invalid id: half-edge count must be positive and even");
        if (root_ < 0 || root_ >= n) throw MapError("invalid id: root");
        prev_.assign(n, -1);
        for (int h = 0; h < n; ++h) {
            const auto& e = he_[h];
            if (e.twin < 0 || e.twin >= n || e.next < 0 || e.next >= n) throw MapError("invalid id");
            if (e.twin == h || he_[e.twin].twin != h) throw MapError("twin-not-involution");
            if (prev_[e.next] >= 0) throw MapError("invalid id: next is not a permutation");
            prev_[e.next] = h;
        }
        // vertices
        std::vector<int> vid(n, -1);
        nv_ = 0;
        vertex_he_.clear();
        for (int h = 0; h < n; ++h) {
            if (vid[h] >= 0) continue;
            vertex_he_.emplace_back();
            int g = h;
            do {
                vid[g] = nv_;
                vertex_he_.back().push_back(g);
                g = he_[g].next;
            } while (g != h);
            ++nv_;
        }
        if (check_origin) {
            std::vector<int> map(n, -1);
            for (int h = 0; h < n; ++h) {
                int o = he_[h].origin;
                if (o < 0 || o >= nv_) throw MapError("invalid id: origin");
                if (map[vid[h]] < 0) map[vid[h]] = o;
                if (map[vid[h]] != o) throw MapError("invalid id: origin not constant around vertex");
            }
            std::vector<int> inv(nv_, -1);
            for (int v = 0; v < nv_; ++v) {
                if (inv[map[v]] >= 0) throw MapError("invalid id: origin shared by two vertices");
                inv[map[v]] = v;
            }
            std::vector<std::vector<int>> reordered(nv_);
            for (int v = 0; v < nv_; ++v) reordered[map[v]] = std::move(vertex_he_[v]);
            vertex_he_ = std::move(reordered);
        } else {
            for (int h = 0; h < n; ++h) he_[h].origin = vid[h];
        }
        // faces
        face_.assign(n, -1);
        face_he_.clear();
        nf_ = 0;
        for (int h = 0; h < n; ++h) {
            if (face_[h] >= 0) continue;
            face_he_.emplace_back();
            int g = h;
            do {
                face_[g] = nf_;
                face_he_.back().push_back(g);
                g = face_next(g);
            } while (g != h);
            ++nf_;
        }
        // connectivity
        std::vector<char> seen(n, 0);
        std::vector<int> stack{root_};
        seen[root_] = 1;
        int count = 1;
        while (!stack.empty()) {
            int h = stack.back();
            stack.pop_back();
            for (int g : {he_[h].twin, he_[h].next})
                if (!seen[g]) {
                    seen[g] = 1;
                    ++count;
                    stack.push_back(g);
                }
        }
        if (count != n) throw MapError("disconnected");
        int chi = nv_ - n / 2 + nf_;
        if (chi > 2 || chi % 2) throw MapError("invalid Euler characteristic");
        genus_ = (2 - chi) / 2;
    }

    std::vector<HalfEdge> he_;
    std::vector<int> prev_, face_;
    std::vector<std::vector<int>> vertex_he_, face_he_;
    int root_ = 0, nv_ = 0, nf_ = 0, genus_ = 0;
};

enum class Color : std::uint8_t { blue = 0, yellow = 1 };

struct SiteColoring {
    std::vector<Color> colors;
    bool blue_boundary = true;
};

// Map and coloring code: colors appended in vertex visit order.
inline std::string colored_code(const PlanarMap& m, const SiteColoring& c) {
    std::string code = m.canonical_code();
    for (int v : m.vertex_visit_order()) code.push_back(c.colors[v] == Color::blue ? 'b' : 'y');
    return code;
}

// Disk triangulation: the outer face is the face to the right of the root.
struct DiskTriangulation {
    PlanarMap map;
    int outer_face = 0;
    int perimeter = 0;

    static DiskTriangulation from_map(PlanarMap m) {
        DiskTriangulation d;
        d.outer_face = m.face(m.root());
        d.perimeter = m.face_degree(d.outer_face);
        d.map = std::move(m);
        d.validate();
        return d;
    }

    // Boundary half-edges in ccw order around the disk, starting at the root.
    // Each has the outer face on its right and the disk on its left.
    std::vector<int> boundary() const {
        std::vector<int> out;
        int h = map.root();
        do {
            out.push_back(h);
            h = map.face_next(h);
        } while (h != map.root());
        return out;
    }

    std::vector<char> boundary_mask() const {
        std::vector<char> b(map.vertex_count(), 0);
        for (int h : boundary()) b[map.origin(h)] = 1;
        return b;
    }

    void validate() const {
        if (map.genus() != 0) throw MapError("not planar");
        if (perimeter < 2) throw MapError("perimeter < 2");
        for (int f = 0; f < map.face_count(); ++f)
            if (f != outer_face && map.face_degree(f) != 3) throw MapError("inner face not a triangle");
        for (int h = 0; h < map.size(); ++h)
            if (map.origin(h) == map.target(h)) throw MapError("self-loop");
        std::vector<char> seen(map.vertex_count(), 0);
        for (int h : boundary()) {
            if (seen[map.origin(h)]) throw MapError("outer boundary not simple");
            seen[map.origin(h)] = 1;
        }
        if (map.face_count() < 2) throw MapError("no inner face");
    }

    // Counterclockwise triangles on labels 0..nv-1 forming a disk; vertex ids
    // keep the labels. The root is the boundary half-edge u->v with the disk on
    // its left.
    static DiskTriangulation from_triangles(int nv, const std::vector<std::array<int, 3>>& tris, int u, int v) {
        const int n = int(tris.size()) * 3;
        std::vector<HalfEdge> he(n);
        std::vector<int> fprev(n);
        std::map<std::pair<int, int>, int> dir;
        for (int t = 0; t < int(tris.size()); ++t)
            for (int i = 0; i < 3; ++i) {
                int h = 3 * t + i;
                he[h].origin = tris[t][i];
                fprev[h] = 3 * t + (i + 2) % 3;
                if (!dir.emplace(std::pair{tris[t][i], tris[t][(i + 1) % 3]}, h).second)
                    throw MapError("repeated oriented edge");
            }
        std::vector<int> outer_from(nv, -1);  // only used to reject pinched boundaries
        for (auto& [k, h] : dir) {
            auto it = dir.find({k.second, k.first});
            if (it != dir.end()) {
                he[h].twin = it->second;
            } else {
                int o = int(he.size());
                he.push_back({h, -1, k.second});
                fprev.push_back(-1);
                he[h].twin = o;
                if (outer_from[k.second] >= 0) throw MapError("outer boundary not simple");
                outer_from[k.second] = o;
            }
        }
        // outer half-edge y->x is preceded on its face by the outer half-edge into y
        std::vector<int> outer_into(nv, -1);
        for (int h = n; h < int(he.size()); ++h) outer_into[he[he[h].twin].origin] = h;
        for (int h = n; h < int(he.size()); ++h) fprev[h] = outer_into[he[h].origin];
        for (int h = 0; h < int(he.size()); ++h) {
            if (fprev[h] < 0) throw MapError("outer boundary not simple");
            he[h].next = he[fprev[h]].twin;
        }
        auto it = dir.find({u, v});
        if (it == dir.end()) throw MapError("root edge missing");
        return from_map(PlanarMap::build(std::move(he), it->second));
    }
};

}  // namespace lqglab
