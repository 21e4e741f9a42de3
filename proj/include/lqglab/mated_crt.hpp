#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "exponents.hpp"
#include "lattice_walks.hpp"
#include "rng.hpp"

namespace lqglab {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Undirected graph in CSR form; vertex i is the time cell [i, i+1]·dt.
struct MatedCrtGraph {
    int n = 0;
    double gamma = 0;
    std::vector<std::int64_t> offset;  // n + 1
    std::vector<int> adj;

    std::int64_t edge_count() const { return std::int64_t(adj.size()) / 2; }
    int degree(int v) const { return int(offset[v + 1] - offset[v]); }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> e;
        for (int v = 0; v < n; ++v)
            for (auto k = offset[v]; k < offset[v + 1]; ++k)
                if (v < adj[k]) e.push_back({v, adj[k]});
        return e;
    }

    static MatedCrtGraph from_edges(int n, std::vector<std::pair<int, int>> e, double gamma = 0) {
        for (auto& [a, b] : e) {
            if (a > b) std::swap(a, b);
            if (a < 0 || b >= n || a == b) throw GraphError("invalid edge");
        }
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
        MatedCrtGraph g;
        g.n = n, g.gamma = gamma;
        g.offset.assign(n + 1, 0);
        for (auto [a, b] : e) ++g.offset[a + 1], ++g.offset[b + 1];
        for (int v = 0; v < n; ++v) g.offset[v + 1] += g.offset[v];
        g.adj.resize(g.offset[n]);
        std::vector<std::int64_t> pos(g.offset.begin(), g.offset.end() - 1);
        for (auto [a, b] : e) g.adj[pos[a]++] = b, g.adj[pos[b]++] = a;
        for (int v = 0; v < n; ++v) std::sort(g.adj.begin() + g.offset[v], g.adj.begin() + g.offset[v + 1]);
        return g;
    }
};

namespace detail {

// Cells i < j joined by a horizontal chord under the graph of P:
// max(m_i, m_j) <= min P[i+1..j], with m_i = min(P[i], P[i+1]).
inline void chord_edges(const std::vector<double>& P, std::vector<std::pair<int, int>>& out) {
    const int n = int(P.size()) - 1;
    struct Alive {
        int cell;
        double m;    // cell minimum
        double seg;  // min of P from cell+1 up to the entry above (or the current sample)
    };
    std::vector<Alive> st;
    for (int j = 1; j < n; ++j) {
        const double pj = P[j];
        if (!st.empty()) st.back().seg = std::min(st.back().seg, pj);
        while (!st.empty() && st.back().m > pj) {
            double s = st.back().seg;
            st.pop_back();
            if (!st.empty()) st.back().seg = std::min(st.back().seg, s);
        }
        st.push_back({j - 1, std::min(P[j - 1], pj), pj});
        const double mj = std::min(pj, P[j + 1]);
        double run = std::numeric_limits<double>::infinity();
        for (auto it = st.rbegin(); it != st.rend(); ++it) {
            run = std::min(run, it->seg);
            if (run < mj) break;
            out.push_back({it->cell, j});
        }
    }
}

}  // namespace detail

inline MatedCrtGraph build_mated_crt(const BrownianPair& bm, double gamma = 0) {
    if (bm.L.size() != bm.R.size() || bm.L.size() < 3) throw GraphError("need at least two cells");
    const int n = int(bm.L.size()) - 1;
    std::vector<std::pair<int, int>> e;
    e.reserve(std::size_t(n) * 4);
    detail::chord_edges(bm.L, e);
    detail::chord_edges(bm.R, e);
    return MatedCrtGraph::from_edges(n, std::move(e), gamma);
}

// O(n^3) oracle straight from the chord rule.
inline std::vector<std::pair<int, int>> mated_crt_edges_bruteforce(const BrownianPair& bm) {
    const int n = int(bm.L.size()) - 1;
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            bool adj = j == i + 1;
            for (const auto* P : {&bm.L, &bm.R}) {
                if (adj) break;
                double mi = std::min((*P)[i], (*P)[i + 1]), mj = std::min((*P)[j], (*P)[j + 1]);
                double gap = std::numeric_limits<double>::infinity();
                for (int k = i + 1; k <= j; ++k) gap = std::min(gap, (*P)[k]);
                adj = std::max(mi, mj) <= gap;
            }
            if (adj) e.push_back({i, j});
        }
    return e;
}

inline BrownianPair mated_crt_brownian(double gamma, int n, Philox& g) {
    return sample_correlated_bm(mot_correlation_from_gamma(gamma), n, 1.0 / n, g);
}

inline MatedCrtGraph sample_mated_crt(double gamma, int n, Philox& g) { return build_mated_crt(mated_crt_brownian(gamma, n, g), gamma); }

struct BallGrowth {
    std::vector<double> radii, mean_volume, stderr_;
    double exponent = 0, exponent_stderr = 0;
    int centers = 0;
};

// |B_r(v)| for each radius, by one truncated BFS.
inline std::vector<double> ball_volumes(const MatedCrtGraph& g, int v, const std::vector<double>& radii,
                                        std::vector<int>& dist, std::vector<int>& queue) {
    const int rmax = int(radii.back());
    queue.clear();
    queue.push_back(v);
    dist[v] = 0;
    std::vector<long> at(rmax + 1, 0);
    for (std::size_t q = 0; q < queue.size(); ++q) {
        int u = queue[q];
        ++at[dist[u]];
        if (dist[u] == rmax) continue;
        for (auto k = g.offset[u]; k < g.offset[u + 1]; ++k) {
            int w = g.adj[k];
            if (dist[w] < 0) dist[w] = dist[u] + 1, queue.push_back(w);
        }
    }
    const bool exhausted = at[rmax] == 0;
    for (int u : queue) dist[u] = -1;
    if (exhausted) throw GraphError("radius exceeds diameter");
    std::vector<double> vol;
    long cum = 0;
    int r = 0;
    for (double R : radii) {
        for (; r <= int(R); ++r) cum += at[r];
        vol.push_back(double(cum));
    }
    return vol;
}

// Slope of log mean |B_r| against log r; centers uniform in the middle 98% of
// time, stderr from a 20-block bootstrap over centers.
inline BallGrowth ball_growth_exponent(const MatedCrtGraph& g, const std::vector<double>& radii, int centers,
                                       std::uint64_t seed, int threads = 0) {
    if (radii.size() < 2) throw GraphError("need at least two radii");
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] > radii[k - 1]) || radii[0] < 1) throw GraphError("radii must increase from 1");
    if (centers < 20) throw GraphError("need at least 20 centers");
    const int lo = g.n / 100, hi = g.n - g.n / 100;
    if (hi <= lo) throw GraphError("graph too small");
    std::vector<std::vector<double>> vols(centers);
    threads = thread_count(threads);
    std::vector<std::vector<int>> dist(threads, std::vector<int>(g.n, -1)), queue(threads);
    parallel_for(std::size_t(centers), threads, [&](std::size_t c, int w) {
        Philox r(seed, c);
        int v = lo + int(uniform_below(r, std::uint64_t(hi - lo)));
        vols[c] = ball_volumes(g, v, radii, dist[w], queue[w]);
    });
    BallGrowth out;
    out.radii = radii;
    out.centers = centers;
    const std::size_t K = radii.size();
    auto means = [&](const std::vector<int>& blocks) {
        std::vector<double> m(K, 0.0);
        long cnt = 0;
        for (int b : blocks)
            for (long c = long(centers) * b / 20; c < long(centers) * (b + 1) / 20; ++c, ++cnt)
                for (std::size_t k = 0; k < K; ++k) m[k] += vols[c][k];
        for (auto& x : m) x /= double(cnt);
        return m;
    };
    std::vector<int> all(20);
    for (int b = 0; b < 20; ++b) all[b] = b;
    out.mean_volume = means(all);
    for (std::size_t k = 0; k < K; ++k) {
        double s2 = 0;
        for (auto& v : vols) s2 += (v[k] - out.mean_volume[k]) * (v[k] - out.mean_volume[k]);
        out.stderr_.push_back(std::sqrt(s2 / (centers - 1) / centers));
    }
    out.exponent = loglog_fit(radii, out.mean_volume).slope;
    Philox bg(seed, 0xB007B007ull);
    double m = 0, m2 = 0;
    const int reps = 400;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<int> pick(20);
        for (auto& b : pick) b = int(uniform_below(bg, 20));
        double e = loglog_fit(radii, means(pick)).slope;
        m += e, m2 += e * e;
    }
    m /= reps;
    out.exponent_stderr = std::sqrt(std::max(m2 / reps - m * m, 0.0) * reps / (reps - 1));
    return out;
}

}  // namespace lqglab
