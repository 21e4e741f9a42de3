#include <gtest/gtest.h>

#include <set>

#include "lqglab/mullin.hpp"

using namespace lqglab;

TEST(Mullin, RoundTripExhaustive) {
    for (int n2 = 2; n2 <= 10; n2 += 2) {
        std::set<std::string> codes;
        auto walks = enumerate_excursions(StepSet::mullin(), n2, {0, 0}, {0, 0});
        for (auto& w : walks) {
            auto r = sew_walk_to_refined(w);
            auto d = extract_tree_map(r);
            EXPECT_EQ(map_tree_to_walk(d).steps, w.steps) << w.serialize();
            std::string code = d.map.canonical_code();
            for (int h : d.map.bfs_order()) code.push_back(d.in_tree[h] ? 't' : 'n');
            codes.insert(code);
        }
        EXPECT_EQ(codes.size(), walks.size());
    }
}

namespace {

using namespace mullin_step;

LatticeWalk mw(std::vector<int> s) { return {StepSet::mullin(), {0, 0}, std::move(s)}; }

}  // namespace

TEST(Mullin, SingleEdge) {
    auto r = sew_walk_to_refined(mw({up, down}));
    EXPECT_EQ(r.tri.face_count(), 2);
    auto d = extract_tree_map(r);
    EXPECT_EQ(d.map.vertex_count(), 2);
    EXPECT_EQ(d.map.size(), 2);
    EXPECT_EQ(d.tree_size(), 1);
    EXPECT_EQ(map_tree_to_walk(d).steps, (std::vector<int>{up, down}));
}

TEST(Mullin, Loop) {
    auto r = sew_walk_to_refined(mw({right, left}));
    EXPECT_EQ(r.tri.face_count(), 2);
    auto d = extract_tree_map(r);
    EXPECT_EQ(d.map.vertex_count(), 1);
    EXPECT_EQ(d.map.size(), 2);
    EXPECT_EQ(d.tree_size(), 0);
    EXPECT_EQ(map_tree_to_walk(d).steps, (std::vector<int>{right, left}));
}

TEST(Mullin, Errors) {
    EXPECT_THROW(sew_walk_to_refined(mw({down, up})), WalkError);
    EXPECT_THROW(sew_walk_to_refined(mw({up, left, right, down})), WalkError);
    EXPECT_THROW(sew_walk_to_refined(mw({up})), WalkError);
    EXPECT_THROW(sew_walk_to_refined(mw({})), WalkError);

    // a cycle is not a spanning tree
    auto d = extract_tree_map(sew_walk_to_refined(mw({right, left})));
    d.in_tree.assign(d.map.size(), 1);
    EXPECT_THROW(map_tree_to_walk(d), MapError);
}

TEST(Mullin, CardinalityMatchesCounts) {
    const long catcat[] = {1, 2, 10, 70, 588, 5544};  // Cat_n Cat_{n+1}
    for (int n = 1; n <= 5; ++n) {
        auto walks = enumerate_excursions(StepSet::mullin(), 2 * n, {0, 0}, {0, 0});
        ASSERT_EQ(count_excursions(StepSet::mullin(), 2 * n, {0, 0}, {0, 0}), BigInt(walks.size()));
        EXPECT_EQ(long(walks.size()), catcat[n]);
        std::set<std::string> codes;
        for (auto& w : walks) {
            auto d = extract_tree_map(sew_walk_to_refined(w));
            EXPECT_EQ(d.map.size(), 2 * n);
            std::string code = d.map.canonical_code();
            for (int h : d.map.bfs_order()) code.push_back(d.in_tree[h] ? 't' : 'n');
            codes.insert(code);
        }
        EXPECT_EQ(codes.size(), walks.size()) << n;
    }
}

TEST(Mullin, RandomTreesAndPeano) {
    Philox g(2024, 1);
    for (int k = 0; k < 1000; ++k) {
        auto w = sample_excursion(StepSet::mullin(), 200, {0, 0}, {0, 0}, g);
        auto r = sew_walk_to_refined(w);
        validate_refined(r);
        auto d = extract_tree_map(r);
        ASSERT_NO_THROW(d.validate());
        int ups = 0, rights = 0, dual = 0;
        for (int s : w.steps) ups += s == up, rights += s == right;
        for (int h = 0; h < r.tri.size(); ++h) dual += r.dual_tree[h];
        EXPECT_EQ(d.tree_size(), ups);
        EXPECT_EQ(dual / 2, rights);
        EXPECT_EQ(d.map.face_count() - 1, rights);

        auto p = peano_order(r);
        ASSERT_EQ(int(p.size()), r.tri.face_count());
        std::set<int> distinct(p.begin(), p.end());
        EXPECT_EQ(distinct.size(), p.size());
        for (std::size_t t = 0; t + 1 < p.size(); ++t) {
            int e = r.edge_sequence[t + 1];
            std::set<int> sides{r.tri.face(e), r.tri.face(r.tri.twin(e))};
            EXPECT_EQ(sides, (std::set<int>{p[t], p[t + 1]})) << t;
        }
    }
}

TEST(Mullin, PeanoTwoFaces) {
    for (auto& w : enumerate_excursions(StepSet::mullin(), 2, {0, 0}, {0, 0})) {
        auto r = sew_walk_to_refined(w);
        auto p = peano_order(r);
        ASSERT_EQ(p.size(), 2u);
        // starts left of e_0 and ends on its other side
        EXPECT_EQ(p[0], r.tri.face(r.tri.twin(0)));
        EXPECT_EQ(p[1], r.tri.face(0));
        EXPECT_NE(p[0], p[1]);
    }
}

TEST(Mullin, RoundTripLong) {
    Philox g(77, 3);
    for (int k = 0; k < 1000; ++k) {
        auto w = sample_excursion(StepSet::mullin(), 10000, {0, 0}, {0, 0}, g);
        auto d = extract_tree_map(sew_walk_to_refined(w));
        ASSERT_EQ(map_tree_to_walk(d).steps, w.steps) << k;
    }
}
