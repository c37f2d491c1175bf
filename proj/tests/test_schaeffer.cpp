#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "uiq/error.hpp"
#include "uiq/schaeffer.hpp"

using namespace uiq;

namespace {

CornerSequence finite_face(std::vector<Label> labels) {
    CornerSequence s;
    for (std::size_t i = 0; i < labels.size(); ++i) s.corners.push_back({static_cast<long long>(i), static_cast<int>(i), labels[i]});
    return s;
}

// Random well-labelled tree with n edges: a random labelled tree re-rooted at
// a corner of minimal label and shifted so that this label becomes 1.
LabelledTree random_tree(int n, std::mt19937_64& rng) {
    std::vector<int> parent{-1};
    std::vector<Label> label{0};
    for (int k = 1; k <= n; ++k) {
        parent.push_back(static_cast<int>(rng() % k));
        label.push_back(label[parent.back()] + static_cast<Label>(rng() % 3) - 1);
    }
    std::vector<std::vector<int>> adj(n + 1);
    for (int k = 1; k <= n; ++k) {
        adj[parent[k]].push_back(k);
        adj[k].push_back(parent[k]);
    }
    // contour walk of the unrooted plane tree from vertex 0
    std::vector<int> walk{0};
    std::vector<std::size_t> it(n + 1, 0);
    std::vector<int> stack{0};
    while (walk.size() < static_cast<std::size_t>(2 * n)) {
        int v = stack.back();
        int up = stack.size() > 1 ? stack[stack.size() - 2] : -1;
        int next = -1;
        while (it[v] < adj[v].size()) {
            int u = adj[v][it[v]++];
            if (u != up) { next = u; break; }
        }
        if (next < 0) { stack.pop_back(); walk.push_back(stack.back()); }
        else { stack.push_back(next); walk.push_back(next); }
    }
    std::size_t k0 = 0;
    for (std::size_t i = 0; i < walk.size(); ++i)
        if (label[walk[i]] < label[walk[k0]]) k0 = i;
    const Label shift = 1 - label[walk[k0]];
    TreeBuilder b(1);
    std::vector<int> path{walk[k0]}, img{0};
    for (std::size_t i = 1; i < walk.size(); ++i) {
        int v = walk[(k0 + i) % walk.size()];
        if (path.size() > 1 && path[path.size() - 2] == v) { path.pop_back(); img.pop_back(); }
        else { img.push_back(b.add_child(img.back(), label[v] + shift)); path.push_back(v); }
    }
    return std::move(b).build();
}

}  // namespace

TEST_CASE("successor on finite faces") {
    CHECK(successor(finite_face({0, 1, 2, 1}), 2) == 3);
    CHECK(successor(finite_face({0, 1, 2, 3, 2, 1}), 3) == 4);
    CHECK(successor(finite_face({0, 1, 2, 3, 2, 1}), 2) == 5);
    CHECK_THROWS_AS(successor(finite_face({0, 1, 2, 1}), 1), DomainError);
}

TEST_CASE("successor on an infinite window crosses the spine") {
    CornerSequence s;
    s.infinite = true;
    s.certified_label = 1;
    s.corners = {{-1, 10, 1}, {0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    CHECK(successor(s, 2) == -1);
    // label 2 is not certified, so the successor of the label-3 corner is unknown
    CHECK_THROWS_AS(successor(s, 3), DomainError);
    s.certified_label = 2;
    CHECK_THROWS_AS(successor(s, 3), DomainError);  // no label 2 corner at or left of 0
    s.corners.insert(s.corners.begin(), {-2, 11, 2});
    CHECK(successor(s, 3) == -2);
}

TEST_CASE("successor on the left side stays on the left") {
    CornerSequence s;
    s.infinite = true;
    s.certified_label = 2;
    s.corners = {{-4, 4, 3}, {-3, 3, 2}, {-2, 2, 2}, {-1, 1, 1}, {0, 0, 0}, {1, 5, 1}};
    CHECK(successor(s, -4) == -3);
    CHECK(successor(s, -2) == -1);
    CHECK(successor(s, -3) == -1);
}

TEST_CASE("chord planarity") {
    CHECK(chords_planar({{{1, 4}, {2, 3}, {4, 6}}}));
    CHECK(chords_planar({{{1, 5}, {2, 5}}}));
    CHECK_FALSE(chords_planar({{{1, 3}, {2, 4}}}));
}

TEST_CASE("phi on the two trees with one edge") {
    auto q = phi(parse_tree("(1(2))"));
    auto d = validate_quadrangulation(q);
    CHECK(d.valid);
    CHECK(d.V == 3);
    CHECK(d.E == 2);
    CHECK(d.F == 1);
    auto dist = bfs_distances(q);
    std::multiset<int> ds(dist.begin(), dist.end());
    CHECK(ds == std::multiset<int>{0, 1, 2});
    CHECK(q.degree(q.root_vertex()) == 1);

    auto p = phi(parse_tree("(1(1))"));
    CHECK(validate_quadrangulation(p).valid);
    CHECK(p.degree(p.root_vertex()) == 2);
    CHECK(canonical_code(p) != canonical_code(q));
    CHECK(serialize_tree(phi_inverse(q)) == "(1(2))");
    CHECK(serialize_tree(phi_inverse(p)) == "(1(1))");
}

TEST_CASE("phi rejects bad input") {
    CHECK_THROWS_AS(phi(parse_tree("(1)")), DomainError);
    CHECK_THROWS_AS(phi(parse_tree("(1(0))")), DomainError);
    CHECK_THROWS_AS(phi(parse_tree("(2(1))")), DomainError);
}

TEST_CASE("exhaustive: injective, inverse, distances, literal steps") {
    for (int n = 1; n <= 5; ++n) {
        auto trees = enumerate_trees(n, 1, true);
        std::set<std::string> codes;
        for (const auto& t : trees) {
            auto q = phi(t);
            auto diag = validate_quadrangulation(q);
            REQUIRE_MESSAGE(diag.valid, serialize_tree(t));
            CHECK(diag.V == n + 2);
            CHECK(diag.F == n);
            codes.insert(canonical_code(q));
            auto dist = bfs_distances(q);
            auto vd = phi_vertex_darts(t);
            for (std::size_t v = 0; v < t.num_vertices(); ++v) CHECK(dist[q.vertex(vd[v])] == t.label(static_cast<int>(v)));
            CHECK(dist[q.vertex(vd.back())] == 0);
            auto back = phi_inverse(q);
            CHECK_MESSAGE(back == t, serialize_tree(t) << " -> " << serialize_tree(back));

            auto lit = phi_literal(t);
            CHECK(lit.bad_faces.empty());
            CHECK(lit.chords_planar);
            CHECK(canonical_code(lit.result) == canonical_code(q));
        }
        CHECK(codes.size() == trees.size());
    }
}

TEST_CASE("step-one faces agree with the successor operation") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        auto t = random_tree(1 + static_cast<int>(rng() % 12), rng);
        for (const auto& f : step1_faces(t)) {
            const auto& cs = f.corners;
            CHECK(cs.front().label == 0);
            CHECK(cs[1].label == 1);
            CHECK(cs.back().label == 1);
            for (std::size_t j = 1; j + 1 < cs.size(); ++j) {
                if (cs[j].label < 2) continue;
                long long s = successor(f, cs[j].index);
                CHECK(s > cs[j].index);
                CHECK(cs[static_cast<std::size_t>(s)].label == cs[j].label - 1);
                for (long long x = cs[j].index + 1; x < s; ++x) CHECK(cs[static_cast<std::size_t>(x)].label != cs[j].label - 1);
            }
        }
    }
}

TEST_CASE("random: face census, distances and roundtrip at moderate size") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 30; ++k) {
        auto t = random_tree(50 + static_cast<int>(rng() % 400), rng);
        auto q = phi(t);
        REQUIRE(validate_quadrangulation(q).valid);
        auto lit = phi_literal(t);
        CHECK(lit.bad_faces.empty());
        CHECK(lit.chords_planar);
        CHECK(canonical_code(lit.result) == canonical_code(q));
        CHECK(phi_inverse(q) == t);
    }
}

TEST_CASE("window ball rejects trees with small labels above the window") {
    CHECK_THROWS_AS(window_ball(parse_tree("(1(2(1)))"), 1, 1), DomainError);
    CHECK(window_ball(parse_tree("(1(2))"), 1, 0).empty());
}

TEST_CASE("a labelled R+1 parent at generation S changes the ball when truncated") {
    auto t = parse_tree("(1(1)(2)(1)(2)(2(3)))");
    REQUIRE_FALSE(in_omega(t, 1, 1));
    auto full = ball(phi(t), 1), cut = window_ball(t, 1, 1);
    CHECK(full.map.num_edges() == 11);
    CHECK(cut.map.num_edges() == 10);
    CHECK(canonical_code(full) != canonical_code(cut));
}

TEST_CASE("exhaustive: truncation one generation deeper keeps the ball") {
    for (int n = 1; n <= 6; ++n)
        for (const auto& t : enumerate_trees(n, 1, true))
            for (int S = 1; S <= 2; ++S)
                for (int R = 1; R <= 2; ++R) {
                    if (in_omega(t, S, R)) continue;
                    auto full = canonical_code(ball(phi(t), R));
                    CHECK_MESSAGE(canonical_code(window_ball(t, S + 1, R)) == full,
                                  serialize_tree(t) << " S=" << S << " R=" << R);
                    bool high_parents = true;
                    for (int v = 0; v < static_cast<int>(t.num_vertices()); ++v)
                        if (t.depth(v) == S && t.num_children(v) > 0 && t.label(v) <= R + 1) high_parents = false;
                    if (high_parents)
                        CHECK_MESSAGE(canonical_code(window_ball(t, S, R)) == full,
                                      serialize_tree(t) << " S=" << S << " R=" << R);
                }
}

TEST_CASE("regrafting above the window keeps the ball") {
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int k = 0; k < 400; ++k) {
        auto t = random_tree(20 + static_cast<int>(rng() % 80), rng);
        const int R = 1 + static_cast<int>(rng() % 2);
        int S = 1;  // deepest generation carrying a label <= R+1
        for (int v = 0; v < static_cast<int>(t.num_vertices()); ++v)
            if (t.label(v) <= R + 1) S = std::max(S, t.depth(v));
        // graft a random high subtree under a random generation S + 1 vertex
        auto b = ball_tree(t, S + 1);
        std::vector<int> tips;
        for (int v = 0; v < static_cast<int>(b.num_vertices()); ++v)
            if (b.depth(v) == S + 1) tips.push_back(v);
        if (tips.empty()) continue;
        int tip = tips[rng() % tips.size()];
        TreeBuilder g(b.label(0));
        std::vector<int> img(b.num_vertices());
        for (int v = 1; v < static_cast<int>(b.num_vertices()); ++v) {
            img[v] = g.add_child(img[b.parent(v)], b.label(v));
            if (v == tip) {
                int at = img[v];
                for (int j = 0; j < 5; ++j) at = g.add_child(at, g.label(at) + 1);
            }
        }
        auto t2 = std::move(g).build();
        REQUIRE_FALSE(in_omega(t2, S, R));
        CHECK(canonical_code(window_ball(t, S + 1, R)) == canonical_code(window_ball(t2, S + 1, R)));
        CHECK(canonical_code(ball(phi(t), R)) == canonical_code(ball(phi(t2), R)));
        ++checked;
    }
    CHECK(checked > 200);
}

TEST_CASE("pruning keeps the ball") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        auto t = random_tree(1 + static_cast<int>(rng() % 60), rng);
        for (int R = 0; R <= 3; ++R) {
            auto p = prune_for_ball(t, R);
            CHECK(p.is_well_labelled());
            CHECK(p.num_vertices() <= t.num_vertices() + 0u);
            CHECK_MESSAGE(canonical_code(ball(phi(p), R)) == canonical_code(ball(phi(t), R)),
                          serialize_tree(t) << " R=" << R);
        }
    }
}
