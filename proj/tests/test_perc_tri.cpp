#include <gtest/gtest.h>

#include <map>
#include <set>

#include "lqglab/perc_tri.hpp"

using namespace lqglab;

TEST(PercTri, InjectiveAndValid) {
    for (int l = 0; l <= 2; ++l) {
        std::set<std::string> codes;
        std::size_t total = 0;
        for (int len = 0; len <= 9; ++len) {
            auto walks = enumerate_excursions(StepSet::kreweras(), len, {l, 0}, {0, 0});
            for (auto& w : walks) {
                if (l == 0 && len == 0) continue;
                auto p = sew_walk_to_percolated(w, l);
                EXPECT_EQ(p.tri.perimeter, l + 2);
                codes.insert(colored_code(p.tri.map, p.coloring));
                ++total;
            }
        }
        EXPECT_EQ(codes.size(), total);
    }
}

namespace {

using namespace kreweras_step;

LatticeWalk kw(int l, std::vector<int> s) { return {StepSet::kreweras(), {l, 0}, std::move(s)}; }

// exact law of colored outputs for walks of length <= 3 dmax - l, weight 3^-m
std::map<std::string, double> exact_law(int l, int dmax) {
    std::map<std::string, double> law;
    double Z = 0;
    for (int d = std::max(l, 1); d <= dmax; ++d) {
        int m = 3 * d - l;
        for (auto& w : enumerate_excursions(StepSet::kreweras(), m, {l, 0}, {0, 0})) {
            auto p = sew_walk_to_percolated(w, l);
            double wt = std::pow(3.0, -m);
            law[colored_code(p.tri.map, p.coloring)] += wt;
            Z += wt;
        }
    }
    for (auto& [k, v] : law) v /= Z;
    return law;
}

}  // namespace

TEST(PercTri, SmallestWalks) {
    auto a = sew_walk_to_percolated(kw(0, {north, east, zip}), 0);
    auto b = sew_walk_to_percolated(kw(0, {east, north, zip}), 0);
    EXPECT_NE(colored_code(a.tri.map, a.coloring), colored_code(b.tri.map, b.coloring));
    EXPECT_EQ(a.tri.map.canonical_code(), b.tri.map.canonical_code());
    EXPECT_EQ(a.tri.map.vertex_count(), 3);
    EXPECT_THROW(sew_walk_to_percolated(kw(0, {}), 0), WalkError);
    EXPECT_THROW(sew_walk_to_percolated(kw(0, {zip, north, east}), 0), WalkError);
    EXPECT_THROW(sew_walk_to_percolated(kw(1, {north, east, zip}), 0), WalkError);
    EXPECT_THROW(sew_walk_to_percolated(kw(1, {north}), 1), WalkError);
}

TEST(PercTri, CountingAndEuler) {
    for (int l = 0; l <= 2; ++l)
        for (int len = 0; len <= 9; ++len)
            for (auto& w : enumerate_excursions(StepSet::kreweras(), len, {l, 0}, {0, 0})) {
                if (l == 0 && len == 0) continue;
                auto p = sew_walk_to_percolated(w, l);
                ASSERT_NO_THROW(p.tri.validate());
                int u = 0, r = 0, d = 0;
                for (int s : w.steps) (s == north ? u : s == east ? r : d)++;
                EXPECT_EQ(u - d, 0);
                EXPECT_EQ(r - d, -l);
                const auto& M = p.tri.map;
                EXPECT_EQ(M.face_count() - 1, u + r);
                EXPECT_EQ(M.vertex_count() - M.size() / 2 + M.face_count(), 2);
                EXPECT_EQ(M.vertex_count(), d + 2);
                auto bm = p.tri.boundary_mask();
                for (int v = 0; v < M.vertex_count(); ++v)
                    if (bm[v]) EXPECT_EQ(p.coloring.colors[v], Color::blue);
                auto h = interior_color_histogram(p);
                EXPECT_EQ(h.blue + h.yellow, M.vertex_count() - p.tri.perimeter);
            }
}

TEST(PercTri, HistogramWithoutInterior) {
    auto p = sew_walk_to_percolated(kw(1, {north, zip}), 1);
    auto h = interior_color_histogram(p);
    EXPECT_EQ(h.blue, 0);
    EXPECT_EQ(h.yellow, 0);
}

TEST(Boltzmann, BoundaryAndPerimeter) {
    Philox g(5, 0);
    for (int l = 0; l <= 3; ++l) {
        BoltzmannPercolated B(l, 30);
        for (int k = 0; k < 300; ++k) {
            auto p = B(g);
            EXPECT_EQ(p.tri.perimeter, l + 2);
            auto bm = p.tri.boundary_mask();
            for (int v = 0; v < p.tri.map.vertex_count(); ++v)
                if (bm[v]) ASSERT_EQ(p.coloring.colors[v], Color::blue);
        }
    }
}

TEST(Boltzmann, MatchesEnumeratedLaw) {
    const int N = 100000;
    auto law = exact_law(0, 3);
    BoltzmannPercolated B(0, 5);
    Philox g(99, 0);
    std::map<std::string, long> emp;
    std::map<std::string, long> shape;
    std::map<std::string, int> shape_vertices;
    std::map<std::string, std::map<std::string, long>> colorings;
    for (int k = 0; k < N; ++k) {
        auto p = B(g);
        auto cc = colored_code(p.tri.map, p.coloring);
        ASSERT_TRUE(law.count(cc));
        ++emp[cc];
        auto sc = p.tri.map.canonical_code();
        ++shape[sc];
        shape_vertices[sc] = p.tri.map.vertex_count();
        ++colorings[sc][cc];
    }
    double tv = 0;
    for (auto& [k, p] : law) tv += std::abs(p - double(emp[k]) / N);
    tv /= 2;
    EXPECT_LT(tv, 0.02);

    // uncolored marginal: P(S) proportional to (2/27)^V at fixed perimeter
    std::string s3, s4;
    for (auto& [k, c] : shape) {
        if (shape_vertices[k] == 3 && s3.empty()) s3 = k;
        if (shape_vertices[k] == 4 && s4.empty()) s4 = k;
    }
    ASSERT_FALSE(s3.empty());
    ASSERT_FALSE(s4.empty());
    double ratio = double(shape[s3]) / double(shape[s4]);
    double expect = 27.0 / 2.0;
    double sigma = ratio * std::sqrt(1.0 / shape[s3] + 1.0 / shape[s4]);
    EXPECT_NEAR(ratio, expect, 3 * sigma);
    // the same ratio from the enumerated law
    double p3 = 0, p4 = 0;
    for (auto& [k, p] : law) {
        if (k.compare(0, s3.size(), s3) == 0 && k.size() == s3.size() + 3) p3 += p;
        if (k.compare(0, s4.size(), s4) == 0 && k.size() == s4.size() + 4) p4 += p;
    }
    EXPECT_NEAR(p3 / p4, expect, 1e-9);

    // interior colorings uniform given the shape (df 3, 0.99 quantile)
    const auto& cs = colorings[s4];
    ASSERT_EQ(cs.size(), 4u);
    double chi = 0, tot = double(shape[s4]);
    for (auto& [k, c] : cs) chi += (c - tot / 4) * (c - tot / 4) / (tot / 4);
    EXPECT_LT(chi, 11.345);
}
