#include <doctest.h>

#include "uiq/error.hpp"
#include "uiq/experiments.hpp"

using namespace uiq;

TEST_CASE("total variation") {
    std::map<std::string, long> a{{"x", 3}, {"y", 1}}, b{{"x", 1}, {"z", 1}};
    CHECK(tv_distance(a, 4, a, 4) == 0);
    // (|3/4 - 1/2| + 1/4 + 1/2) / 2
    CHECK(tv_distance(a, 4, b, 2) == doctest::Approx(0.5));
    CHECK(tv_distance(a, 4, {{"q", 2}}, 2) == doctest::Approx(1));
}

TEST_CASE("report status and serialization") {
    ExperimentReport r;
    r.id = "demo";
    CHECK(r.status() == Status::Pass);
    r.inconclusive("floor", "k large");
    CHECK(r.status() == Status::Inconclusive);
    r.check("bound", false, "too big");
    CHECK(r.status() == Status::Fail);
    r.points.push_back({"s", 1, 0.5, 0.1, 0.4, true});
    auto j = r.to_json();
    CHECK(j["id"] == "demo");
    CHECK(j["status"] == "fail");
    CHECK(j["checks"].size() == 2);
    CHECK(r.to_csv().find("demo,s,1,0.5") != std::string::npos);
}

TEST_CASE("spine scaling is reproducible and independent of jobs") {
    auto a = spine_scaling(1000, 1000, 9, 1), b = spine_scaling(1000, 1000, 9, 3);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].estimate == b.points[i].estimate);
    CHECK(a.to_json()["parameters"]["steps"] == 1000);
    CHECK_THROWS_AS(spine_scaling(10, 1000, 9), DomainError);
}

TEST_CASE("escape law at small k") {
    auto r = escape_law(Rational(1, 2), {10, 20, 40}, 1.0);
    CHECK(r.points.size() == 3);
    for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].estimate > r.points[i - 1].estimate);
    CHECK_THROWS_AS(escape_law(Rational(3, 2), {10}, 0.1), DomainError);
}

TEST_CASE("generation size and ball convergence at small scale") {
    auto g = generation_size({1, 2}, 500, 4);
    CHECK(g.points.size() >= 2);
    CHECK(g.status() == Status::Pass);
    auto c = ball_prob_convergence({parse_tree("(1(2))")}, {10, 20, 40});
    for (auto& ck : c.checks)
        if (ck.name.rfind("gap decreasing", 0) == 0) CHECK(ck.status == Status::Pass);
    CHECK_THROWS_AS(ball_prob_convergence({parse_tree("(1(2))")}, {20, 10}), DomainError);
}

TEST_CASE("two-route comparison runs end to end") {
    TwoRouteOptions o;
    o.max_steps = 10'000'000;
    auto r = two_route_comparison(1, {8, 16}, 200, 1e-9, 3, o);
    auto j = r.to_json();
    CHECK(j["extra"]["tv"].size() == 2);
    CHECK(j["extra"].contains("windows_used"));
    CHECK_THROWS_AS(two_route_comparison(1, {8}, 10, 0.5, 3, o), DomainError);
}
