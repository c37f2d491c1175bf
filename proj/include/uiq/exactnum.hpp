#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "uiq/tree.hpp"

namespace uiq {

using Rational = mpq_class;
using BigInt = mpz_class;

std::string to_string(const Rational& q);
std::string to_string(const BigInt& z);

// w_l = 2 l (l+3) / ((l+1)(l+2)), defined for l >= 0 (and 0 for l < 0).
Rational w(Label l);

// d_0 = 0, d_1 = 1, d_{l+1} = (12 / w_l^2 - 1) d_l - d_{l-1}.
Rational d_recursive(Label l);

// The closed form (2 w_l / 560)(4 l^4 + 30 l^3 + 59 l^2 + 42 l + 4), kept only for auditing.
Rational d_printed(Label l);

struct KernelRow {
    Rational q, r, p;
    Rational sum() const { return q + r + p; }
};

struct AuditRow {
    Label l;
    Rational printed, recursive;
    Rational row_sum_printed, row_sum_recursive;
    double relative_deviation;  // printed / recursive - 1
};

std::vector<AuditRow> d_printed_audit(Label l_max);
nlohmann::json audit_to_json(const std::vector<AuditRow>& rows);

// Exact w, d and kernel rows for 0 <= l <= l_max (d and w also at l_max + 1).
class KernelTable {
public:
    explicit KernelTable(Label l_max);
    Label l_max() const { return l_max_; }
    const Rational& w(Label l) const { return w_.at(static_cast<std::size_t>(l)); }
    const Rational& d(Label l) const { return d_.at(static_cast<std::size_t>(l)); }
    KernelRow row(Label l) const;
    nlohmann::json to_json() const;

private:
    Label l_max_;
    std::vector<Rational> w_, d_;
};

KernelRow kernel_row(Label l);

// Floating copies of d_0..d_{l_max} from the same recursion, in extended precision.
std::vector<long double> d_float(Label l_max);
long double w_float(Label l);
// w_l - w_{l-m} for 0 <= m <= l, evaluated without cancellation.
long double w_gap_float(Label l, Label m);

// The ratio bound d_{l+1}/d_l >= ((l+1)/l)^3 holds for every l >= this base;
// the base case is checked in exact arithmetic, the inductive step reduces to
// 6 l^2 - 42 >= 0. Consequently d_i >= d_M (i/M)^3 for all i >= M >= base.
Label d_growth_base();

// Exact counts D_n^(l) of well-labelled trees with n edges and root label l.
class CountTable {
public:
    explicit CountTable(int n_max);
    int n_max() const { return n_max_; }
    // l < 1 gives 0; l > n+1 saturates to D_n^(n+1) = 3^n Cat(n).
    const BigInt& D(int n, Label l) const;
    const BigInt& D(int n) const { return D(n, 1); }
    nlohmann::json to_json() const;

private:
    int n_max_;
    std::vector<std::vector<BigInt>> D_;  // D_[n][l-1], 1 <= l <= n+1
    BigInt zero_;
};

// Probability that a uniform tree of T_n has ball_tree(., S) equal to ball.
// S defaults to the height of the ball.
Rational mu_n_ball_prob(const LabelledTree& ball, int n, const CountTable& table, int S = -1);

// Probability under the infinite measure that the generation-S ball equals ball.
Rational mu_ball_prob(const LabelledTree& ball, int S = -1);
// The same formula evaluated with d_printed, for the audit.
Rational mu_ball_prob_printed(const LabelledTree& ball, int S = -1);

// Limit-measure mass summed over the one-generation extensions of ball in which
// every generation-S vertex has at most K children, with a bound on the mass
// of the remaining extensions.
struct ExtensionSum {
    Rational partial;
    Rational tail_bound;
};
ExtensionSum extension_sum(const LabelledTree& ball, int K, int S = -1);

struct Bracket {
    long double lower, upper;
    long double value() const { return (lower + upper) / 2; }
};

// P_k[T_j = infinity] for the spine chain, with a certified enclosure of
// width at most precision (up to floating rounding).
Bracket hitting_prob_infinite(Label k, Label j, long double precision = 1e-12L);

// Probability under rho-hat^(l) that every label exceeds m.
Rational subtree_min_tail(Label l, Label m);

struct EscapeBound {
    double bound;          // certified upper bound
    double tail_majorant;  // contribution bounded analytically beyond the summed range
    std::int64_t terms;    // number of states summed explicitly
};

// Upper bound on the probability that, from spine label y, a label <= R+1
// shows up on the rest of the spine or in a subtree hanging from it
// (the current vertex's subtrees included).
EscapeBound escape_bound(Label y, Label R, double precision = 1e-4);

}  // namespace uiq
