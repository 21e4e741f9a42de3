#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rng.hpp"

namespace lqglab {

using BigInt = boost::multiprecision::cpp_int;

struct WalkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Point {
    int x = 0, y = 0;
    friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(Point a, Point b) { return !(a == b); }
};

struct StepSet {
    std::string name;
    std::vector<Point> steps;

    // up, right, down, left
    static StepSet mullin() { return {"mullin", {{0, 1}, {1, 0}, {0, -1}, {-1, 0}}}; }
    static StepSet kreweras() { return {"kreweras", {{0, 1}, {1, 0}, {-1, -1}}}; }

    static StepSet by_name(const std::string& n) {
        if (n == "mullin") return mullin();
        if (n == "kreweras") return kreweras();
        throw WalkError("unknown step set: " + n);
    }

    int size() const { return int(steps.size()); }
    int max_dx() const { return max_of([](Point p) { return p.x; }); }
    int max_dy() const { return max_of([](Point p) { return p.y; }); }
    int max_neg_dx() const { return max_of([](Point p) { return -p.x; }); }
    int max_neg_dy() const { return max_of([](Point p) { return -p.y; }); }

private:
    template <class F>
    int max_of(F f) const {
        int m = 0;
        for (auto s : steps) m = std::max(m, f(s));
        return m;
    }
};

namespace mullin_step {
constexpr int up = 0, right = 1, down = 2, left = 3;
}

struct LatticeWalk {
    StepSet step_set;
    Point start;
    std::vector<int> steps;

    int length() const { return int(steps.size()); }

    Point end() const {
        Point p = start;
        for (int s : steps) p.x += step_set.steps[s].x, p.y += step_set.steps[s].y;
        return p;
    }

    std::vector<Point> path() const {
        std::vector<Point> out{start};
        for (int s : steps) out.push_back({out.back().x + step_set.steps[s].x, out.back().y + step_set.steps[s].y});
        return out;
    }

    bool in_quadrant() const {
        for (auto p : path())
            if (p.x < 0 || p.y < 0) return false;
        return true;
    }

    bool is_quadrant_excursion(Point to) const { return in_quadrant() && end() == to; }

    std::string serialize() const {
        std::ostringstream os;
        os << "WALK v1 " << step_set.name << ' ' << start.x << ' ' << start.y;
        for (int s : steps) os << ' ' << s;
        return os.str();
    }

    static LatticeWalk parse(const std::string& line) {
        std::istringstream is(line);
        std::string magic, ver, name;
        LatticeWalk w;
        if (!(is >> magic >> ver >> name >> w.start.x >> w.start.y) || magic != "WALK" || ver != "v1")
            throw WalkError("bad WALK header");
        w.step_set = StepSet::by_name(name);
        int s;
        while (is >> s) {
            if (s < 0 || s >= w.step_set.size()) throw WalkError("step index out of range");
            w.steps.push_back(s);
        }
        return w;
    }
};

namespace detail {

// Box of positions that can appear at time t on a quadrant walk start -> end of
// the given length.
struct Cone {
    const StepSet* s;
    Point start, end;
    int length;

    int xmax(int t) const {
        return std::min(start.x + t * s->max_dx(), end.x + (length - t) * s->max_neg_dx());
    }
    int ymax(int t) const {
        return std::min(start.y + t * s->max_dy(), end.y + (length - t) * s->max_neg_dy());
    }
    int xmin(int t) const { return std::max(0, std::max(start.x - t * s->max_neg_dx(), end.x - (length - t) * s->max_dx())); }
    int ymin(int t) const { return std::max(0, std::max(start.y - t * s->max_neg_dy(), end.y - (length - t) * s->max_dy())); }
};

// Dense per-time layers over the cone. Values are scaled per layer so that
// doubles survive long walks; only ratios within a layer are meaningful.
struct BackwardTable {
    Cone cone;
    std::vector<int> x0, y0, w, h;
    std::vector<std::vector<double>> layer;

    double get(int t, int x, int y) const {
        int i = x - x0[t], j = y - y0[t];
        if (i < 0 || j < 0 || i >= w[t] || j >= h[t]) return 0.0;
        return layer[t][std::size_t(i) * h[t] + j];
    }

    static std::size_t cells(const Cone& c) {
        std::size_t tot = 0;
        for (int t = 0; t <= c.length; ++t) {
            long wx = c.xmax(t) - c.xmin(t) + 1, hy = c.ymax(t) - c.ymin(t) + 1;
            if (wx > 0 && hy > 0) tot += std::size_t(wx) * std::size_t(hy);
        }
        return tot;
    }

    BackwardTable(const StepSet& s, int length, Point start, Point end) : cone{&s, start, end, length} {
        const int L = length;
        x0.resize(L + 1), y0.resize(L + 1), w.resize(L + 1), h.resize(L + 1), layer.resize(L + 1);
        for (int t = 0; t <= L; ++t) {
            x0[t] = cone.xmin(t), y0[t] = cone.ymin(t);
            w[t] = std::max(0, cone.xmax(t) - x0[t] + 1), h[t] = std::max(0, cone.ymax(t) - y0[t] + 1);
            layer[t].assign(std::size_t(w[t]) * h[t], 0.0);
        }
        if (end.x < 0 || end.y < 0) return;
        if (end.x >= x0[L] && end.x < x0[L] + w[L] && end.y >= y0[L] && end.y < y0[L] + h[L])
            layer[L][std::size_t(end.x - x0[L]) * h[L] + (end.y - y0[L])] = 1.0;
        for (int t = L - 1; t >= 0; --t) {
            double mx = 0;
            for (int i = 0; i < w[t]; ++i)
                for (int j = 0; j < h[t]; ++j) {
                    double acc = 0;
                    for (auto st : s.steps) acc += get(t + 1, x0[t] + i + st.x, y0[t] + j + st.y);
                    layer[t][std::size_t(i) * h[t] + j] = acc;
                    mx = std::max(mx, acc);
                }
            if (mx > 0)
                for (auto& v : layer[t]) v /= mx;
        }
    }
};

inline BigInt count_dp(const StepSet& s, int length, Point start, Point end) {
    if (length < 0) throw WalkError("negative length");
    if (start.x < 0 || start.y < 0 || end.x < 0 || end.y < 0) return 0;
    Cone c{&s, start, end, length};
    std::map<std::pair<int, int>, BigInt> cur{{{start.x, start.y}, BigInt(1)}};
    for (int t = 0; t < length; ++t) {
        std::map<std::pair<int, int>, BigInt> nxt;
        for (auto& [p, v] : cur)
            for (auto st : s.steps) {
                int x = p.first + st.x, y = p.second + st.y;
                if (x < c.xmin(t + 1) || y < c.ymin(t + 1) || x > c.xmax(t + 1) || y > c.ymax(t + 1)) continue;
                nxt[{x, y}] += v;
            }
        cur = std::move(nxt);
    }
    auto it = cur.find({end.x, end.y});
    return it == cur.end() ? BigInt(0) : it->second;
}

// Uniform Dyck path of semilength k by the cycle lemma; true = up.
inline std::vector<bool> uniform_dyck(int k, Philox& g) {
    std::vector<bool> seq(2 * k + 1, false);
    for (int i = 0; i <= k; ++i) seq[i] = true;
    for (int i = 2 * k; i > 0; --i) {
        int j = int(uniform_below(g, std::uint64_t(i) + 1));
        bool tmp = seq[i];
        seq[i] = seq[j];
        seq[j] = tmp;
    }
    // rotation starting right after the last minimum of the prefix sums is
    // the unique one with all partial sums positive
    int s = 0, best = 0, at = 0;
    for (int i = 0; i < 2 * k + 1; ++i) {
        if (s <= best) best = s, at = i;
        s += seq[i] ? 1 : -1;
    }
    std::vector<bool> out;
    out.reserve(2 * k);
    for (int i = 1; i < 2 * k + 1; ++i) out.push_back(seq[(at + i) % (2 * k + 1)]);
    return out;
}

inline BigInt binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline BigInt catalan(int n) { return binom(2 * n, n) / (n + 1); }

}  // namespace detail

inline BigInt count_excursions(const StepSet& s, int length, Point start, Point end) {
    return detail::count_dp(s, length, start, end);
}

inline std::vector<LatticeWalk> enumerate_excursions(const StepSet& s, int length, Point start, Point end,
                                                     std::size_t cap = 1u << 22) {
    if (count_excursions(s, length, start, end) > BigInt(cap)) throw WalkError("cap exceeded");
    std::vector<LatticeWalk> out;
    if (start.x < 0 || start.y < 0) return out;
    detail::BackwardTable tab(s, length, start, end);
    LatticeWalk cur{s, start, {}};
    // depth-first in step-index order gives lexicographic output
    auto rec = [&](auto&& self, int t, Point p) -> void {
        if (t == length) {
            out.push_back(cur);
            return;
        }
        for (int i = 0; i < s.size(); ++i) {
            Point q{p.x + s.steps[i].x, p.y + s.steps[i].y};
            if (tab.get(t + 1, q.x, q.y) <= 0) continue;
            cur.steps.push_back(i);
            self(self, t + 1, q);
            cur.steps.pop_back();
        }
    };
    if (tab.get(0, start.x, start.y) > 0) rec(rec, 0, start);
    return out;
}

// Exact uniform mullin excursions of length 2n: split word, two Dyck paths, interleave.
class MullinSampler {
public:
    explicit MullinSampler(int n) : n_(n) {
        if (n < 0) throw WalkError("negative length");
        // weight of k horizontal pairs: C(2n,2k) Cat_k Cat_{n-k}, in log space
        auto lcat = [](int m) { return std::lgamma(2.0 * m + 1) - std::lgamma(m + 1.0) - std::lgamma(m + 2.0); };
        std::vector<double> lw(n + 1);
        double top = -std::numeric_limits<double>::infinity();
        for (int k = 0; k <= n; ++k) {
            lw[k] = std::lgamma(2.0 * n + 1) - std::lgamma(2.0 * k + 1) - std::lgamma(2.0 * (n - k) + 1) + lcat(k) +
                    lcat(n - k);
            top = std::max(top, lw[k]);
        }
        double acc = 0;
        for (int k = 0; k <= n; ++k) cum_.push_back(acc += std::exp(lw[k] - top));
    }

    LatticeWalk operator()(Philox& g) const {
        double r = uniform01(g) * cum_.back();
        int k = std::min(n_, int(std::upper_bound(cum_.begin(), cum_.end(), r) - cum_.begin()));
        auto hx = detail::uniform_dyck(k, g), vy = detail::uniform_dyck(n_ - k, g);
        // uniform positions of the 2k horizontal steps among 2n
        std::vector<char> horiz(2 * n_, 0);
        std::fill(horiz.begin(), horiz.begin() + 2 * k, 1);
        for (int i = 2 * n_ - 1; i > 0; --i) std::swap(horiz[i], horiz[uniform_below(g, std::uint64_t(i) + 1)]);
        LatticeWalk w{StepSet::mullin(), {0, 0}, {}};
        w.steps.reserve(2 * n_);
        std::size_t a = 0, b = 0;
        for (int i = 0; i < 2 * n_; ++i) {
            if (horiz[i])
                w.steps.push_back(hx[a++] ? mullin_step::right : mullin_step::left);
            else
                w.steps.push_back(vy[b++] ? mullin_step::up : mullin_step::down);
        }
        return w;
    }

private:
    int n_;
    std::vector<double> cum_;
};

struct RejectionStats {
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
};

// Uniform excursion by DP-backward sampling over the reachable cone.
class BackwardSampler {
public:
    BackwardSampler(const StepSet& s, int length, Point start, Point end)
        : s_(s), start_(start), tab_(std::make_unique<detail::BackwardTable>(s_, length, start, end)) {
        if (start.x < 0 || start.y < 0 || tab_->get(0, start.x, start.y) <= 0)
            throw WalkError("empty excursion set");
    }

    LatticeWalk operator()(Philox& g) const {
        LatticeWalk w{s_, start_, {}};
        Point p = start_;
        const int L = tab_->cone.length;
        std::vector<double> wt(s_.size());
        for (int t = 0; t < L; ++t) {
            double tot = 0;
            for (int i = 0; i < s_.size(); ++i) {
                wt[i] = tab_->get(t + 1, p.x + s_.steps[i].x, p.y + s_.steps[i].y);
                tot += wt[i];
            }
            double u = uniform01(g) * tot;
            int pick = 0;
            while (pick + 1 < s_.size() && (u >= wt[pick] || wt[pick] == 0)) u -= wt[pick++];
            w.steps.push_back(pick);
            p.x += s_.steps[pick].x, p.y += s_.steps[pick].y;
        }
        return w;
    }

private:
    StepSet s_;
    Point start_;
    std::unique_ptr<detail::BackwardTable> tab_;
};

// i.i.d. uniform steps, aborted as soon as the walk leaves the cone.
inline LatticeWalk rejection_excursion(const StepSet& s, int length, Point start, Point end, Philox& g,
                                       RejectionStats* stats = nullptr, std::uint64_t max_attempts = 1ull << 40) {
    detail::Cone c{&s, start, end, length};
    for (std::uint64_t a = 0; a < max_attempts; ++a) {
        if (stats) ++stats->attempts;
        LatticeWalk w{s, start, {}};
        Point p = start;
        bool ok = true;
        for (int t = 0; t < length && ok; ++t) {
            int i = int(uniform_below(g, std::uint64_t(s.size())));
            p.x += s.steps[i].x, p.y += s.steps[i].y;
            w.steps.push_back(i);
            ok = p.x >= c.xmin(t + 1) && p.y >= c.ymin(t + 1) && p.x <= c.xmax(t + 1) && p.y <= c.ymax(t + 1);
        }
        if (ok && p == end) {
            if (stats) ++stats->accepted;
            return w;
        }
    }
    throw WalkError("rejection sampling exhausted");
}

inline constexpr std::size_t kBackwardCellCap = 40'000'000;

inline LatticeWalk sample_excursion(const StepSet& s, int length, Point start, Point end, Philox& g) {
    if (length < 0) throw WalkError("negative length");
    if (s.name == "mullin" && start == Point{0, 0} && end == Point{0, 0}) {
        if (length % 2) throw WalkError("empty excursion set");
        return MullinSampler(length / 2)(g);
    }
    if (detail::BackwardTable::cells({&s, start, end, length}) <= kBackwardCellCap)
        return BackwardSampler(s, length, start, end)(g);
    if (s.name == "kreweras" && ((end.x + end.y) - (start.x + start.y) - length) % 3 != 0)
        throw WalkError("empty excursion set");
    return rejection_excursion(s, length, start, end, g);
}

inline double step_correlation(const StepSet& s) {
    double mx = 0, my = 0;
    for (auto p : s.steps) mx += p.x, my += p.y;
    mx /= s.size(), my /= s.size();
    double vx = 0, vy = 0, cxy = 0;
    for (auto p : s.steps) {
        vx += (p.x - mx) * (p.x - mx);
        vy += (p.y - my) * (p.y - my);
        cxy += (p.x - mx) * (p.y - my);
    }
    if (vx == 0 || vy == 0) throw WalkError("degenerate variance");
    return cxy / std::sqrt(vx * vy);
}

struct RescaledWalk {
    std::vector<double> t, L, R;
};

inline std::pair<double, double> step_variances(const StepSet& s) {
    double mx = 0, my = 0, vx = 0, vy = 0;
    for (auto p : s.steps) mx += p.x, my += p.y;
    mx /= s.size(), my /= s.size();
    for (auto p : s.steps) vx += (p.x - mx) * (p.x - mx), vy += (p.y - my) * (p.y - my);
    return {vx / s.size(), vy / s.size()};
}

inline RescaledWalk rescale_walk(const LatticeWalk& w) {
    if (w.steps.empty()) throw WalkError("empty walk");
    auto [vx, vy] = step_variances(w.step_set);
    const double n = w.length(), sx = std::sqrt(n * vx), sy = std::sqrt(n * vy);
    RescaledWalk r;
    auto path = w.path();
    for (std::size_t k = 0; k < path.size(); ++k) {
        r.t.push_back(k / n);
        r.L.push_back(path[k].x / sx);
        r.R.push_back(path[k].y / sy);
    }
    return r;
}

struct BrownianPair {
    double dt = 1.0;
    double rho = 0.0;
    std::vector<double> L, R;
};

inline BrownianPair sample_correlated_bm(double rho, int n, double dt, Philox& g, double L0 = 0.0, double R0 = 0.0) {
    if (!(rho >= -1.0 && rho <= 1.0)) throw WalkError("invalid rho");
    if (n < 1 || !(dt > 0)) throw WalkError("invalid size or dt");
    BrownianPair b{dt, rho, {}, {}};
    b.L.resize(n + 1), b.R.resize(n + 1);
    b.L[0] = L0, b.R[0] = R0;
    const double sd = std::sqrt(dt), c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int i = 1; i <= n; ++i) {
        double z1 = normal01(g), z2 = normal01(g);
        b.L[i] = b.L[i - 1] + sd * z1;
        b.R[i] = b.R[i - 1] + sd * (rho * z1 + c * z2);
    }
    return b;
}

}  // namespace lqglab
