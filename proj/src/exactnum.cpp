#include "uiq/exactnum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "uiq/error.hpp"

namespace uiq {

std::string to_string(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::string to_string(const BigInt& z) { return z.get_str(); }

namespace {

Rational rat(long long num, long long den = 1) {
    Rational q(BigInt(std::to_string(num)), BigInt(std::to_string(den)));
    q.canonicalize();
    return q;
}

// 12 / w_l^2 - 1 = 3 (l+1)^2 (l+2)^2 / (l^2 (l+3)^2) - 1
Rational recursion_coefficient(Label l) {
    BigInt L(std::to_string(l));
    BigInt a = (L + 1) * (L + 2), b = L * (L + 3);
    Rational c(3 * a * a, b * b);
    c.canonicalize();
    return c - 1;
}

void require_label(Label l, Label lo, const char* who) {
    if (l < lo) throw DomainError(std::string(who) + ": label out of range");
}

}  // namespace

Rational w(Label l) {
    if (l <= 0) return 0;
    BigInt L(std::to_string(l));
    Rational q(2 * L * (L + 3), (L + 1) * (L + 2));
    q.canonicalize();
    return q;
}

Rational d_recursive(Label l) {
    require_label(l, 0, "d_recursive");
    Rational prev = 0, cur = 1;
    if (l == 0) return prev;
    for (Label k = 1; k < l; ++k) {
        Rational next = recursion_coefficient(k) * cur - prev;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

Rational d_printed(Label l) {
    require_label(l, 0, "d_printed");
    BigInt L(std::to_string(l));
    BigInt poly = 4 * L * L * L * L + 30 * L * L * L + 59 * L * L + 42 * L + 4;
    Rational q = 2 * w(l) * Rational(poly) / 560;
    q.canonicalize();
    return q;
}

std::vector<AuditRow> d_printed_audit(Label l_max) {
    require_label(l_max, 1, "d_printed_audit");
    KernelTable kt(l_max);
    std::vector<Rational> printed(l_max + 2);
    for (Label l = 0; l <= l_max + 1; ++l) printed[l] = l == 0 ? Rational(0) : d_printed(l);
    std::vector<AuditRow> rows;
    for (Label l = 1; l <= l_max; ++l) {
        Rational r = kt.w(l) * kt.w(l) / 12;
        AuditRow row;
        row.l = l;
        row.printed = printed[l];
        row.recursive = kt.d(l);
        row.row_sum_printed = r * (printed[l - 1] + printed[l] + printed[l + 1]) / printed[l];
        row.row_sum_recursive = kt.row(l).sum();
        row.relative_deviation = Rational(row.printed / row.recursive - 1).get_d();
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json audit_to_json(const std::vector<AuditRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"l", r.l},
                       {"d_printed", to_string(r.printed)},
                       {"d_recursive", to_string(r.recursive)},
                       {"row_sum_printed", to_string(r.row_sum_printed)},
                       {"row_sum_recursive", to_string(r.row_sum_recursive)},
                       {"relative_deviation", r.relative_deviation}});
    }
    return out;
}

KernelTable::KernelTable(Label l_max) : l_max_(l_max) {
    require_label(l_max, 1, "KernelTable");
    w_.resize(l_max + 2);
    d_.resize(l_max + 2);
    for (Label l = 0; l <= l_max + 1; ++l) w_[l] = uiq::w(l);
    d_[0] = 0;
    d_[1] = 1;
    for (Label l = 1; l <= l_max; ++l) d_[l + 1] = recursion_coefficient(l) * d_[l] - d_[l - 1];
}

KernelRow KernelTable::row(Label l) const {
    if (l < 1 || l > l_max_) throw DomainError("kernel_row: label out of range");
    Rational r = w_[l] * w_[l] / 12;
    KernelRow k{r * d_[l - 1] / d_[l], r, r * d_[l + 1] / d_[l]};
    k.q.canonicalize();
    k.r.canonicalize();
    k.p.canonicalize();
    return k;
}

nlohmann::json KernelTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Label l = 1; l <= l_max_; ++l) {
        KernelRow k = row(l);
        rows.push_back({{"l", l},
                        {"w", to_string(w_[l])},
                        {"d", to_string(d_[l])},
                        {"q", to_string(k.q)},
                        {"r", to_string(k.r)},
                        {"p", to_string(k.p)}});
    }
    return {{"l_max", l_max_}, {"rows", rows}};
}

KernelRow kernel_row(Label l) {
    if (l < 1) throw DomainError("kernel_row: l = 0 rejected");
    return KernelTable(l).row(l);
}

std::vector<long double> d_float(Label l_max) {
    require_label(l_max, 1, "d_float");
    std::vector<long double> d(l_max + 1);
    d[0] = 0;
    d[1] = 1;
    for (Label l = 1; l < l_max; ++l) {
        long double a = (long double)(l + 1) * (l + 2), b = (long double)l * (l + 3);
        long double c = 3 * (a / b) * (a / b) - 1;
        d[l + 1] = c * d[l] - d[l - 1];
    }
    return d;
}

long double w_float(Label l) {
    if (l <= 0) return 0;
    return 2.0L - 4.0L / ((long double)(l + 1) * (l + 2));
}

long double w_gap_float(Label l, Label m) {
    if (m <= 0) return 0;
    if (m > l) m = l;
    long double num = 4.0L * m * (2.0L * l - m + 3);
    long double den = (long double)(l - m + 1) * (l - m + 2) * (l + 1) * (l + 2);
    return num / den;
}

Label d_growth_base() {
    static const Label base = [] {
        constexpr Label kBase = 3;
        KernelTable kt(72);
        Rational cube = Rational(kBase + 1, kBase);
        cube = cube * cube * cube;
        if (kt.d(kBase + 1) / kt.d(kBase) < cube) throw Error("d growth base case fails");
        // inductive step: A_l - ((l-1)/l)^3 - ((l+1)/l)^3 = (6 l^2 - 42) / (l^2 (l+3)^2)
        for (Label l = kBase + 1; l <= 64; ++l) {
            Rational lo(l - 1, l), hi(l + 1, l);
            Rational step = recursion_coefficient(l) - lo * lo * lo - hi * hi * hi;
            Rational expect = rat(6 * l * l - 42, l * l * (l + 3) * (l + 3));
            if (step != expect || step < 0) throw Error("d growth inductive step fails");
        }
        return kBase;
    }();
    return base;
}

// ---- counts ------------------------------------------------------------------

CountTable::CountTable(int n_max) : n_max_(n_max) {
    if (n_max < 0) throw DomainError("count_table: n_max must be >= 0");
    D_.resize(n_max + 1);
    D_[0].assign(1, BigInt(1));
    // S_[m][l-1] = sum of D_m^(l') over l' in {l-1, l, l+1}, l' >= 1, for l <= m+2
    std::vector<std::vector<BigInt>> S(n_max + 1);
    auto S_at = [&](int m, Label l) -> const BigInt& {
        const auto& row = S[m];
        return row[std::min<std::size_t>(static_cast<std::size_t>(l - 1), row.size() - 1)];
    };
    auto fill_S = [&](int m) {
        S[m].resize(m + 2);
        for (Label l = 1; l <= m + 2; ++l) S[m][l - 1] = D(m, l - 1) + D(m, l) + D(m, l + 1);
    };
    fill_S(0);
    for (int n = 1; n <= n_max; ++n) {
        D_[n].resize(n + 1);
        for (Label l = 1; l <= n + 1; ++l) {
            BigInt acc = 0;
            for (int m = 0; m < n; ++m) mpz_addmul(acc.get_mpz_t(), S_at(m, l).get_mpz_t(), D(n - 1 - m, l).get_mpz_t());
            D_[n][l - 1] = std::move(acc);
        }
        fill_S(n);
    }
}

const BigInt& CountTable::D(int n, Label l) const {
    if (n < 0 || n > n_max_) throw DomainError("CountTable: n outside table");
    if (l < 1) return zero_;
    const auto& row = D_[n];
    return row[std::min<std::size_t>(static_cast<std::size_t>(l - 1), row.size() - 1)];
}

nlohmann::json CountTable::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int n = 0; n <= n_max_; ++n) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& z : D_[n]) row.push_back(z.get_str());
        rows.push_back(row);
    }
    return {{"n_max", n_max_}, {"D", rows}, {"note", "D[n][l-1] for 1 <= l <= n+1; larger l saturate"}};
}

namespace {

struct BallShape {
    int S;
    std::vector<Label> top;  // labels at generation S
};

BallShape inspect_ball(const LabelledTree& ball, int S, const char* who) {
    if (!ball.is_well_labelled() || ball.label(0) != 1)
        throw DomainError(std::string(who) + ": ball must be well-labelled with root label 1");
    BallShape b{S < 0 ? ball.height() : S, {}};
    if (b.S < ball.height()) throw DomainError(std::string(who) + ": ball is higher than S");
    for (std::size_t v = 0; v < ball.num_vertices(); ++v)
        if (ball.depth(static_cast<int>(v)) == b.S) b.top.push_back(ball.label(static_cast<int>(v)));
    return b;
}

}  // namespace

Rational mu_n_ball_prob(const LabelledTree& ball, int n, const CountTable& table, int S) {
    BallShape b = inspect_ball(ball, S, "mu_n_ball_prob");
    if (b.S == 0 && n >= 1) throw DomainError("mu_n_ball_prob: height-0 ball rejected");
    if (n > table.n_max()) throw DomainError("mu_n_ball_prob: n beyond CountTable");
    const int m = n - static_cast<int>(ball.num_edges());
    if (m < 0) return 0;
    if (b.top.empty()) return m == 0 ? Rational(1, 1) / Rational(table.D(n)) : Rational(0);
    std::vector<BigInt> conv(m + 1);
    for (int x = 0; x <= m; ++x) conv[x] = table.D(x, b.top[0]);
    for (std::size_t j = 1; j < b.top.size(); ++j) {
        std::vector<BigInt> next(m + 1);
        for (int x = 0; x <= m; ++x) {
            BigInt acc = 0;
            for (int y = 0; y <= x; ++y)
                mpz_addmul(acc.get_mpz_t(), conv[y].get_mpz_t(), table.D(x - y, b.top[j]).get_mpz_t());
            next[x] = std::move(acc);
        }
        conv.swap(next);
    }
    Rational p(conv[m], table.D(n));
    p.canonicalize();
    return p;
}

namespace {

template <class DFn>
Rational mu_ball_prob_with(const LabelledTree& ball, int S, const char* who, DFn dfun) {
    BallShape b = inspect_ball(ball, S, who);
    if (b.S == 0) throw DomainError(std::string(who) + ": height-0 ball rejected");
    if (b.top.empty()) return 0;
    Label top = *std::max_element(b.top.begin(), b.top.end());
    KernelTable kt(top);
    Rational sum = 0;
    for (std::size_t i = 0; i < b.top.size(); ++i) {
        Rational term = dfun(kt, b.top[i]);
        for (std::size_t j = 0; j < b.top.size(); ++j)
            if (j != i) term *= kt.w(b.top[j]);
        sum += term;
    }
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 12, ball.num_edges());
    Rational p = sum / Rational(scale);
    p.canonicalize();
    return p;
}

}  // namespace

Rational mu_ball_prob(const LabelledTree& ball, int S) {
    return mu_ball_prob_with(ball, S, "mu_ball_prob", [](const KernelTable& kt, Label l) { return kt.d(l); });
}

Rational mu_ball_prob_printed(const LabelledTree& ball, int S) {
    return mu_ball_prob_with(ball, S, "mu_ball_prob_printed", [](const KernelTable&, Label l) { return d_printed(l); });
}

ExtensionSum extension_sum(const LabelledTree& ball, int K, int S) {
    BallShape b = inspect_ball(ball, S, "extension_sum");
    if (K < 1) throw DomainError("extension_sum: K must be >= 1");
    if (b.top.empty()) return {0, 0};
    Label top = *std::max_element(b.top.begin(), b.top.end());
    KernelTable kt(top + 1);
    // per vertex with label l and c children: sum over child labels of
    // prod w = W^c and of sum_i d_i prod_{j != i} w_j = c D W^(c-1)
    const std::size_t k = b.top.size();
    std::vector<Rational> Aw(k), Ad(k), Tw(k), Td(k);
    for (std::size_t v = 0; v < k; ++v) {
        Label l = b.top[v];
        Rational W = 0, D = 0;
        for (Label c = std::max<Label>(1, l - 1); c <= l + 1; ++c) {
            W += kt.w(c);
            D += kt.d(c);
        }
        Rational x = W / 12;
        if (x >= 1) throw Error("extension_sum: divergent series");
        Rational pw = 1, sw = 0, sd = 0;  // pw = x^c
        for (int c = 0; c <= K; ++c) {
            sw += pw;
            if (c >= 1) sd += c * (D / 12) * (pw / x);
            pw *= x;
        }
        // pw = x^(K+1)
        Aw[v] = sw;
        Ad[v] = sd;
        Tw[v] = pw / (1 - x);
        Rational one_minus = 1 - x;
        Td[v] = (D / 12) * ((K + 1) * (pw / x) - K * pw) / (one_minus * one_minus);
    }
    // limit mass of an extension: 12^-|ball| * sum over new vertices i of d_i prod_{j != i} w_j
    // (the generation-S labels no longer enter)
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 12, ball.num_edges());
    Rational partial = 0, full_upper = 0;
    for (std::size_t i = 0; i < k; ++i) {
        Rational term = Ad[i], upper = Ad[i] + Td[i];
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) {
                term *= Aw[j];
                upper *= Aw[j] + Tw[j];
            }
        partial += term;
        full_upper += upper;
    }
    partial /= Rational(scale);
    full_upper /= Rational(scale);
    partial.canonicalize();
    Rational tail = full_upper - partial;
    tail.canonicalize();
    return {partial, tail};
}

// ---- spine chain functionals --------------------------------------------

namespace {

// Streams d_l from the recursion in extended precision.
class DStream {
public:
    DStream() = default;
    DStream(Label l, long double prev, long double cur) : l_(l), prev_(prev), cur_(cur) {}
    Label index() const { return l_; }
    long double value() const { return cur_; }
    long double previous() const { return prev_; }
    void advance() {
        long double a = (long double)(l_ + 1) * (l_ + 2), b = (long double)l_ * (l_ + 3);
        long double next = (3 * (a / b) * (a / b) - 1) * cur_ - prev_;
        prev_ = cur_;
        cur_ = next;
        ++l_;
    }

private:
    Label l_ = 1;
    long double prev_ = 0, cur_ = 1;
};

constexpr long double kSlack = 1e-14L;

// Upper bound on sum_{i >= M} 1/(d_i d_{i+1}) given d_M, d_{M+1}.
long double sigma_tail(Label M, long double dM, long double dM1) {
    return (1.0L + (long double)M / 5) / (dM * dM1);
}

}  // namespace

Bracket hitting_prob_infinite(Label k, Label j, long double precision) {
    if (j < 1 || k <= j) throw DomainError("hitting_prob_infinite: need k > j >= 1");
    if (!(precision > 0)) throw DomainError("hitting_prob_infinite: precision must be positive");
    const Label base = d_growth_base();
    DStream ds;
    while (ds.index() < j) ds.advance();
    long double num = 0, den = 0;
    for (;;) {
        long double di = ds.value();
        ds.advance();
        long double sigma = 1 / (di * ds.value());
        if (ds.index() - 1 < k) num += sigma;
        den += sigma;
        const Label M = ds.index();
        if (M >= k && M >= base) {
            DStream peek = ds;
            peek.advance();
            long double tail = sigma_tail(M, ds.value(), peek.value());
            if (tail <= precision * den / 2) {
                Bracket b{num / (den + tail) * (1 - kSlack), num / den * (1 + kSlack)};
                b.upper = std::min(b.upper, 1.0L);
                return b;
            }
        }
        if (M > (Label)4e9) throw BudgetExceeded("hitting_prob_infinite: series did not converge");
    }
}

Rational subtree_min_tail(Label l, Label m) {
    if (l < 1 || m < 0) throw DomainError("subtree_min_tail: need l >= 1 and m >= 0");
    if (m >= l) return 0;
    Rational q = w(l - m) / w(l);
    q.canonicalize();
    return q;
}

EscapeBound escape_bound(Label y, Label R, double precision) {
    if (R < 0) throw DomainError("escape_bound: R must be >= 0");
    const Label a = R + 1;
    if (y <= a) throw DomainError("escape_bound: need y > R+1");
    if (!(precision > 0)) throw DomainError("escape_bound: precision must be positive");
    const Label base = d_growth_base();

    // Majorant of sum_{y' >= M} G(y,y') f(y'), with u = y' - a + 1 >= U = M - a + 1.
    auto far_tail = [&](Label M) {
        long double wM = w_float(M);
        long double C = 96.0L * a / (5 * wM * wM * wM);
        long double c1 = a + 4, c2 = a + 1, U1 = (long double)(M - a);  // U - 1
        return C * (2 / U1 + (c2 + 2 * c1) / (2 * U1 * U1) + c1 * c2 / (3 * U1 * U1 * U1));
    };
    Label M = std::max<Label>({2 * y, 1024, base + a + 2});
    while (far_tail(M) > precision / 2) {
        M *= 2;
        if (M > (Label)1 << 36) throw BudgetExceeded("escape_bound: precision too small");
    }

    // Forward pass with checkpoints every kBlock labels.
    constexpr Label kBlock = 1 << 15;
    std::vector<DStream> checkpoints;
    std::vector<long double> s_small;  // s(y') for a <= y' <= y
    DStream ds;
    long double s = 0;
    while (ds.index() < a) ds.advance();
    for (;;) {
        if ((ds.index() - a) % kBlock == 0) checkpoints.push_back(ds);
        if (ds.index() <= y) s_small.push_back(s);
        if (ds.index() == M) break;
        long double di = ds.value();
        ds.advance();
        s += 1 / (di * ds.value());
    }
    DStream after = ds;
    after.advance();
    long double T = sigma_tail(M, ds.value(), after.value());  // T(M) upper bound

    auto phi = [&](Label yp, long double dyp) {
        long double wy = w_float(yp);
        long double f = 2 * w_gap_float(yp, a) / wy;
        return f * 12 * dyp * dyp / (wy * wy);
    };

    // Backward pass: T(y') = sum_{i >= y'} sigma_i.
    long double part_far = 0;  // sum_{y <= y' < M} T(y') phi(y')
    long double T_y = 0;
    std::vector<long double> buf;
    for (std::size_t c = checkpoints.size(); c-- > 0;) {
        DStream cs = checkpoints[c];
        Label lo = cs.index(), hi = std::min<Label>(lo + kBlock, M);
        buf.clear();
        for (Label l = lo; l <= hi; ++l) {
            buf.push_back(cs.value());
            cs.advance();
        }
        for (Label l = hi - 1; l >= lo; --l) {
            long double dl = buf[l - lo], dl1 = buf[l - lo + 1];
            T += 1 / (dl * dl1);  // now T = T(l)
            if (l >= y && l > a) part_far += T * phi(l, dl);
            if (l == y) T_y = T;
        }
    }
    const long double s_inf = T;  // T(a) with s(a) = 0
    long double part_near = 0;       // sum_{a < y' < y} s(y') phi(y')
    {
        DStream ns;
        while (ns.index() < a + 1) ns.advance();
        for (Label l = a + 1; l < y; ++l) {
            part_near += s_small[l - a] * phi(l, ns.value());
            ns.advance();
        }
    }
    const long double s_y = s_small[y - a];
    long double bound = T_y / s_inf + (s_y / s_inf) * part_far + (T_y / s_inf) * part_near;
    long double tail = far_tail(M);
    bound = (bound + tail) * (1 + kSlack);
    return {static_cast<double>(bound) * (1 + 1e-15), static_cast<double>(tail), M - a};
}

}  // namespace uiq
