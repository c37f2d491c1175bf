#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "uiq/error.hpp"
#include "uiq/exactnum.hpp"

using namespace uiq;

namespace {

Rational R(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

}  // namespace

TEST_CASE("w values") {
    CHECK(w(0) == 0);
    CHECK(w(1) == R(4, 3));
    CHECK(w(2) == R(5, 3));
    for (Label l = 1; l < 200; ++l) {
        CHECK(w(l) > w(l - 1));
        CHECK(w(l) < 2);
    }
}

TEST_CASE("d recursion values") {
    CHECK(d_recursive(0) == 0);
    CHECK(d_recursive(1) == 1);
    CHECK(d_recursive(2) == R(23, 4));
    CHECK(d_recursive(3) == R(1809, 100));
    KernelTable kt(60);
    for (Label l = 1; l <= 60; ++l) CHECK(kt.d(l) > kt.d(l - 1));
    CHECK(kt.d(37) == d_recursive(37));
}

TEST_CASE("printed closed form audit") {
    CHECK(d_printed(1) == R(139, 210));
    auto rows = d_printed_audit(10);
    REQUIRE(rows.size() == 10);
    CHECK(rows[0].l == 1);
    CHECK(rows[0].row_sum_printed == R(3696, 3753));
    CHECK(rows[0].row_sum_recursive == 1);
    for (auto& r : rows) CHECK(r.row_sum_recursive == 1);
    auto j = audit_to_json(rows);
    CHECK(j.size() == 10);
    CHECK(j[0]["row_sum_printed"] == "1232/1251");
}

TEST_CASE("kernel rows") {
    auto r1 = kernel_row(1);
    CHECK(r1.q == 0);
    CHECK(r1.r == R(4, 27));
    CHECK(r1.p == R(23, 27));
    auto r2 = kernel_row(2);
    CHECK(r2.q == R(25, 621));
    CHECK(r2.r == R(25, 108));
    CHECK(r2.p == R(67, 92));
    CHECK(r2.sum() == 1);
    CHECK_THROWS_AS(kernel_row(0), DomainError);
    auto far = KernelTable(1000).row(1000);
    CHECK(std::abs(far.q.get_d() - 1.0 / 3) < 1e-2);
    CHECK(std::abs(far.r.get_d() - 1.0 / 3) < 1e-2);
    CHECK(std::abs(far.p.get_d() - 1.0 / 3) < 1e-2);
}

TEST_CASE("kernel identities up to l = 1000") {
    KernelTable kt(1001);
    for (Label l = 1; l <= 1000; ++l) {
        CHECK(kt.row(l).sum() == 1);
        CHECK(kt.w(l - 1) + kt.w(l) + kt.w(l + 1) == 12 * (1 - 1 / kt.w(l)));
    }
}

TEST_CASE("q/p approaches 1 - 8/l at rate 1/l^2") {
    // l^2 |q/p - 1 + 8/l| increases towards 44; values from an independent rational evaluation
    KernelTable kt(101);
    auto dev = [&](Label l) {
        auto row = kt.row(l);
        return std::abs(Rational(row.q / row.p - 1 + Rational(8, l)).get_d()) * l * l;
    };
    CHECK(dev(2) == doctest::Approx(12.221116639).epsilon(1e-9));
    CHECK(dev(10) == doctest::Approx(29.288582666).epsilon(1e-9));
    CHECK(dev(11) == doctest::Approx(30.220215310).epsilon(1e-9));
    CHECK(dev(100) == doctest::Approx(41.929176352).epsilon(1e-9));
    for (Label l = 3; l <= 100; ++l) {
        CHECK(dev(l) > dev(l - 1));
        CHECK(dev(l) < 44);
    }
}

TEST_CASE("float copies track the exact sequences") {
    auto df = d_float(80);
    KernelTable kt(80);
    for (Label l = 1; l <= 80; ++l) CHECK(std::abs(df[l] / kt.d(l).get_d() - 1) < 1e-12);
    for (Label l = 1; l <= 50; ++l)
        for (Label m = 0; m <= l; ++m)
            CHECK(std::abs(static_cast<double>(w_gap_float(l, m)) - Rational(w(l) - w(l - m)).get_d()) < 1e-15);
    CHECK(d_growth_base() == 3);
}

TEST_CASE("count table against brute force") {
    CountTable table(12);
    CHECK(table.D(0, 1) == 1);
    CHECK(table.D(0, 7) == 1);
    CHECK(table.D(1, 1) == 2);
    CHECK(table.D(1, 2) == 3);
    CHECK(table.D(2) == 9);
    CHECK(table.D(3, 0) == 0);
    for (int n = 0; n <= 5; ++n)
        for (Label l = 1; l <= 7; ++l)
            CHECK(table.D(n, l) == static_cast<long>(enumerate_trees(n, l, true).size()));
    // monotone in l and capped by 3^n Cat(n)
    BigInt cat = 1;
    for (int n = 0; n <= 12; ++n) {
        if (n) cat = cat * 2 * (2 * n - 1) / (n + 1);
        BigInt cap;
        mpz_ui_pow_ui(cap.get_mpz_t(), 3, n);
        cap *= cat;
        for (Label l = 1; l <= n + 3; ++l) {
            CHECK(table.D(n, l) <= table.D(n, l + 1));
            CHECK(table.D(n, l) <= cap);
        }
        CHECK(table.D(n, n + 1) == cap);
    }
    CHECK_THROWS(table.D(13, 1));
}

TEST_CASE("finite-size ball probabilities") {
    CountTable table(8);
    CHECK(mu_n_ball_prob(parse_tree("(1(2))"), 2, table) == R(1, 3));
    CHECK(mu_n_ball_prob(parse_tree("(1(2))"), 1, table) == R(1, 2));
    CHECK(mu_n_ball_prob(parse_tree("(1(2)(1))"), 1, table) == 0);
    CHECK_THROWS_AS(mu_n_ball_prob(parse_tree("(1)"), 2, table), DomainError);
    CHECK_THROWS_AS(mu_n_ball_prob(parse_tree("(1(0))"), 2, table), DomainError);
    // exhaustive frequencies of balls over T_n
    for (int n = 1; n <= 6; ++n) {
        auto trees = enumerate_trees(n, 1, true);
        for (int S = 1; S <= 2; ++S) {
            std::map<std::string, long> freq;
            for (auto& t : trees) freq[serialize_tree(ball_tree(t, S))]++;
            Rational total = 0;
            for (auto& [code, c] : freq) {
                Rational p = mu_n_ball_prob(parse_tree(code), n, table, S);
                CHECK(p == R(c, static_cast<long>(trees.size())));
                total += p;
            }
            CHECK(total == 1);
        }
    }
}

TEST_CASE("limit ball probabilities") {
    CHECK(mu_ball_prob(parse_tree("(1(2))")) == R(23, 48));
    CHECK(mu_ball_prob(parse_tree("(1(1))")) == R(1, 12));
    // spine decomposition: both sides trivial and a step 1 -> 2
    CHECK(mu_ball_prob(parse_tree("(1(2))")) == R(3, 4) * R(3, 4) * kernel_row(1).p);
    CHECK(mu_ball_prob(parse_tree("(1)"), 1) == 0);
    // height-1 balls: k children with labels in {1,2}; mass k (d1+d2)(w1+w2)^(k-1)/12^k
    Rational partial = 0;
    const Rational x = (w(1) + w(2)) / 12;
    CHECK(x == R(1, 4));
    for (int k = 1; k <= 8; ++k) {
        Rational direct = 0;
        for (int mask = 0; mask < (1 << k); ++mask) {
            std::string s = "(1";
            for (int j = 0; j < k; ++j) s += (mask >> j & 1) ? "(2)" : "(1)";
            direct += mu_ball_prob(parse_tree(s + ")"));
        }
        Rational pw = 1;
        for (int j = 1; j < k; ++j) pw *= x;
        CHECK(direct == k * (d_recursive(1) + d_recursive(2)) * pw / 12);
        partial += direct;
    }
    // closed form of the full series: (d1 + d2) / 12 / (1 - x)^2
    CHECK((d_recursive(1) + d_recursive(2)) / 12 / ((1 - x) * (1 - x)) == 1);
    CHECK(partial < 1);
    CHECK(1 - partial < 1e-3);
}

TEST_CASE("Kolmogorov consistency by truncated summation") {
    for (const char* s : {"(1(1))", "(1(2))", "(1(1)(2))", "(1(2)(2))", "(1(2)(1)(1))"}) {
        auto b = parse_tree(s);
        auto e = extension_sum(b, 40);
        Rational target = mu_ball_prob(b);
        CHECK(e.partial <= target);
        CHECK(target - e.partial <= e.tail_bound);
        CHECK(e.tail_bound < 1e-9);
    }
    // the grouped sum agrees with summing the limit mass over explicit extensions
    auto b = parse_tree("(1(2)(1))");
    Rational direct = 0;
    // at most 2 children per generation-1 vertex
    std::vector<std::vector<std::string>> kids(2);
    for (int v = 0; v < 2; ++v) {
        Label l = v == 0 ? 2 : 1;
        kids[v].push_back("");
        for (Label a = std::max<Label>(1, l - 1); a <= l + 1; ++a) {
            kids[v].push_back("(" + std::to_string(a) + ")");
            for (Label c = std::max<Label>(1, l - 1); c <= l + 1; ++c)
                kids[v].push_back("(" + std::to_string(a) + ")(" + std::to_string(c) + ")");
        }
    }
    for (auto& x : kids[0])
        for (auto& y : kids[1]) direct += mu_ball_prob(parse_tree("(1(2" + x + ")(1" + y + "))"), 2);
    CHECK(direct == extension_sum(b, 2).partial);
}

TEST_CASE("hitting probabilities") {
    CHECK_THROWS_AS(hitting_prob_infinite(2, 2), DomainError);
    auto b = hitting_prob_infinite(2, 1);
    CHECK(b.lower <= b.upper);
    CHECK(b.upper - b.lower < 1e-11);
    // closed form check for P_2[T_1 = inf] = 1 / sum_i d1 d2 / (d_i d_{i+1})
    KernelTable kt(4001);
    Rational partial = 0;
    for (Label i = 1; i < 400; ++i) partial += kt.d(1) * kt.d(2) / (kt.d(i) * kt.d(i + 1));
    double approx = 1 / partial.get_d();
    CHECK(std::abs(approx - static_cast<double>(b.value())) < 1e-9);
    CHECK(hitting_prob_infinite(1000, 1).lower > 0.99);
    auto half = hitting_prob_infinite(200, 100);
    CHECK(std::abs(static_cast<double>(half.value()) - 0.9921875) < 0.02);
    // monotone in k
    double prev = 0;
    for (Label k : {20, 50, 100, 200, 400}) {
        double v = static_cast<double>(hitting_prob_infinite(k, k / 2).value());
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("hitting probability against a chain simulation") {
    // from 2 the chain escapes or returns to 1; labels >= 60 count as escaped
    KernelTable kt(61);
    std::vector<double> q(61), r(61);
    for (Label l = 1; l <= 60; ++l) {
        q[l] = kt.row(l).q.get_d();
        r[l] = kt.row(l).r.get_d();
    }
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0, 1);
    const int runs = 100000;
    int escaped = 0;
    for (int k = 0; k < runs; ++k) {
        Label y = 2;
        while (y > 1 && y < 60) {
            double u = U(rng);
            y += u < q[y] ? -1 : u < q[y] + r[y] ? 0 : 1;
        }
        escaped += y >= 60;
    }
    double p = static_cast<double>(hitting_prob_infinite(2, 1).value());
    double phat = static_cast<double>(escaped) / runs, se = std::sqrt(p * (1 - p) / runs);
    CHECK(std::abs(phat - p) < 3 * se + 1e-9);
}

TEST_CASE("subtree label tails") {
    CHECK(subtree_min_tail(3, 1) == R(25, 27));
    CHECK(subtree_min_tail(3, 0) == 1);
    CHECK(subtree_min_tail(1, 1) == 0);
    CHECK(subtree_min_tail(2, 5) == 0);
}

TEST_CASE("escape bound") {
    CHECK_THROWS_AS(escape_bound(2, 1), DomainError);
    double prev = escape_bound(3, 1).bound;
    CHECK(prev == doctest::Approx(2.85).epsilon(0.01));
    for (Label y = 4; y <= 50; ++y) {
        double b = escape_bound(y, 1).bound;
        CHECK(b <= prev);
        prev = b;
    }
    auto far = escape_bound(1000, 1);
    CHECK(far.bound < 1e-2);
    CHECK(far.bound > 0);
}

TEST_CASE("table dumps") {
    auto j = KernelTable(3).to_json();
    CHECK(j["rows"][1]["p"] == "67/92");
    auto c = CountTable(2).to_json();
    CHECK(c["D"][2][0] == "9");
}
