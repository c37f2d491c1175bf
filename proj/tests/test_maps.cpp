#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "uiq/error.hpp"
#include "uiq/maps.hpp"
#include "uiq/samplers.hpp"
#include "uiq/schaeffer.hpp"

using namespace uiq;

namespace {

// Same map with darts renamed by a random permutation.
RotationMap relabel(const RotationMap& m, std::mt19937_64& rng) {
    const int D = m.num_darts();
    std::vector<int> perm(D);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> twin(D), next(D);
    for (int d = 0; d < D; ++d) {
        twin[perm[d]] = perm[m.twin(d)];
        next[perm[d]] = perm[m.next(d)];
    }
    return RotationMap(twin, next, perm[m.root()]);
}

LabelledTree random_well_labelled(int n, std::mt19937_64& rng) {
    RandomState r(rng());
    return uiq::random_well_labelled(n, r);
}

}  // namespace

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(RotationMap({1, 0}, {0, 0}, 0), DomainError);
    CHECK_THROWS_AS(RotationMap({0, 1}, {0, 1}, 0), DomainError);
    CHECK_THROWS_AS(RotationMap({1, 0}, {0, 1}, 2), DomainError);
    CHECK(RotationMap().empty());
}

TEST_CASE("validator") {
    auto path = phi(parse_tree("(1(2))"));
    auto d = validate_quadrangulation(path);
    CHECK(d.valid);
    CHECK(d.V == 3);
    CHECK(d.E == 2);
    CHECK(d.F == 1);
    // triangle: three vertices, darts 2i leave vertex i
    RotationMap tri({1, 0, 3, 2, 5, 4}, {5, 2, 1, 4, 3, 0}, 0);
    auto t = validate_quadrangulation(tri);
    CHECK_FALSE(t.valid);
    CHECK(t.F == 2);
    // two disjoint copies of the path quadrangulation
    std::vector<int> tw = path.twins(), nx = path.nexts();
    const int D = path.num_darts();
    for (int x = 0; x < D; ++x) {
        tw.push_back(path.twin(x) + D);
        nx.push_back(path.next(x) + D);
    }
    auto two = validate_quadrangulation(RotationMap(tw, nx, 0));
    CHECK_FALSE(two.valid);
    bool mentions = false;
    for (auto& p : two.problems) mentions |= p.find("disconnected") != std::string::npos;
    CHECK(mentions);
    CHECK_FALSE(validate_quadrangulation(RotationMap()).valid);
}

TEST_CASE("distances") {
    auto path = phi(parse_tree("(1(2))"));
    auto dist = bfs_distances(path);
    CHECK(dist[path.root_vertex()] == 0);
    std::vector<int> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2});
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        auto q = phi(random_well_labelled(1 + static_cast<int>(rng() % 30), rng));
        auto ds = bfs_distances(q);
        for (int e = 0; e < q.num_darts(); ++e) CHECK(std::abs(ds[q.vertex(e)] - ds[q.vertex(q.twin(e))]) == 1);
    }
}

TEST_CASE("json round trip") {
    auto q = phi(parse_tree("(1(2)(1(2)))"));
    auto back = map_from_json(nlohmann::json::parse(map_to_json(q).dump()));
    CHECK(back.twins() == q.twins());
    CHECK(back.nexts() == q.nexts());
    CHECK(back.root() == q.root());
    CHECK_THROWS_AS(map_from_json(nlohmann::json::parse(R"({"twin":[1,0]})")), ParseError);
    CHECK_THROWS_AS(map_from_json(nlohmann::json::parse(R"({"twin":[0,1],"next_at_vertex":[0,1],"root":0})")), ParseError);
}

TEST_CASE("balls") {
    auto path = phi(parse_tree("(1(2))"));
    CHECK(ball(path, 0).empty());
    auto b1 = ball(path, 1);
    CHECK(canonical_code(b1.map) == canonical_code(path));
    CHECK(b1.boundary.empty());
    CHECK_THROWS_AS(ball(path, -1), DomainError);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        auto q = phi(random_well_labelled(1 + static_cast<int>(rng() % 40), rng));
        auto dist = bfs_distances(q);
        int ecc = *std::max_element(dist.begin(), dist.end());
        CHECK(canonical_code(ball(q, ecc + 1).map) == canonical_code(q));
        for (int R = 1; R <= 3; ++R) {
            auto b = ball(q, R);
            if (b.empty()) continue;
            CHECK(canonical_code(ball(b, R)) == canonical_code(b));
            for (int r = 1; r < R; ++r) CHECK(canonical_code(ball(b, r)) == canonical_code(ball(q, r)));
            for (const auto& cyc : b.boundary) {
                CHECK(cyc.size() % 2 == 0);
                for (std::size_t i = 0; i < cyc.size(); ++i) {
                    int x = b.dist[b.map.vertex(cyc[i])], y = b.dist[b.map.vertex(cyc[(i + 1) % cyc.size()])];
                    CHECK(((x == R && y == R + 1) || (x == R + 1 && y == R)));
                }
            }
            // retained faces have a vertex closer than R
            for (int f = 0; f < b.map.num_faces(); ++f) {
                int d0 = b.map.face_dart(f), d = d0, lo = 1 << 30;
                if (!b.retained[d0]) continue;
                do {
                    lo = std::min(lo, b.dist[b.map.vertex(d)]);
                    d = b.map.face_next(d);
                } while (d != d0);
                CHECK(lo < R);
            }
        }
    }
}

TEST_CASE("Krikun completion") {
    auto whole = phi(parse_tree("(1(2))"));
    CHECK(canonical_code(krikun_complete(ball(whole, 2))) == canonical_code(whole));
    auto b = ball(phi(parse_tree("(1(2)(2))")), 1);
    CHECK(validate_quadrangulation(krikun_complete(b)).valid);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        auto q = phi(random_well_labelled(1 + static_cast<int>(rng() % 40), rng));
        for (int R = 1; R <= 3; ++R) {
            auto bl = ball(q, R);
            auto c = krikun_complete(bl);
            auto diag = validate_quadrangulation(c);
            CHECK(diag.valid);
            CHECK(canonical_code(ball(c, R)) == canonical_code(bl));
            // each new vertex has one edge per distance R+1 occurrence on its cycle
            int added = c.num_vertices() - bl.map.num_vertices();
            CHECK(added == static_cast<int>(bl.boundary.size()));
            int occ = 0;
            for (auto& cyc : bl.boundary)
                for (int e : cyc) occ += bl.dist[bl.map.vertex(e)] == R + 1;
            CHECK(c.num_edges() - bl.map.num_edges() == occ);
        }
    }
}

TEST_CASE("canonical codes") {
    auto end_rooted = phi(parse_tree("(1(2))"));
    auto mid_rooted = phi(parse_tree("(1(1))"));
    CHECK(canonical_code(end_rooted) != canonical_code(mid_rooted));
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        auto q = phi(random_well_labelled(1 + static_cast<int>(rng() % 50), rng));
        CHECK(canonical_code(relabel(q, rng)) == canonical_code(q));
    }
    std::set<std::string> codes;
    auto t3 = enumerate_trees(3, 1, true);
    for (auto& t : t3) codes.insert(canonical_code(phi(t)));
    CHECK(t3.size() == 54);
    CHECK(codes.size() == 54);
    // codes separate all rerootings of a map that are not isomorphic
    auto q = phi(parse_tree("(1(2)(1(2)))"));
    std::set<std::string> rooted;
    for (int d = 0; d < q.num_darts(); ++d) rooted.insert(canonical_code(RotationMap(q.twins(), q.nexts(), d)));
    CHECK(rooted.size() >= 2);
}

TEST_CASE("map distance") {
    auto a = phi(parse_tree("(1(1))")), b = phi(parse_tree("(1(2))"));
    CHECK(map_distance(a, a) == 0);
    CHECK(map_distance(a, b) == 1);
    // the paths (1,2,3) and (1,2,2) give maps that agree at R = 1 only if their root faces match
    auto c = phi(parse_tree("(1(2(3)))")), d = phi(parse_tree("(1(2(2)))"));
    auto dist = map_distance(c, d);
    CHECK(dist > 0);
    CHECK(dist <= 1);
    CHECK(map_distance(c, d) == map_distance(d, c));
}
