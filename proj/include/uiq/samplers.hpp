#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

#include "uiq/maps.hpp"
#include "uiq/tree.hpp"

namespace uiq {

// Seeded generator; sub-streams are derived with splitmix64 so that sample i
// of a run with master seed s is reproducible on its own.
class RandomState {
public:
    explicit RandomState(std::uint64_t seed = 1) : seed_(seed), eng_(seed) {}
    static std::uint64_t split(std::uint64_t seed, std::uint64_t index);
    RandomState derive(std::uint64_t index) const { return RandomState(split(seed_, index)); }

    std::uint64_t seed() const { return seed_; }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_); }
    int increment() { return static_cast<int>(below(3)) - 1; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

// Uniform plane tree with n edges (labels all 1), by the cycle lemma.
LabelledTree uniform_plane_tree(int n, RandomState& rng);

// Uniform element of T_n by rejection: uniform shape, increments, retry until
// every label is >= 1. The shape is drawn step by step along the contour so a
// failed attempt stops at its first bad label.
LabelledTree uniform_well_labelled(int n, RandomState& rng, std::uint64_t* attempts = nullptr);

// A well-labelled tree with n edges that is cheap to produce but not uniform:
// a uniform random labelled tree re-rooted at a corner of minimal label and
// shifted so that this label is 1.
LabelledTree random_well_labelled(int n, RandomState& rng);

// rho-hat^(l) by rejection: geometric(1/2) offspring, uniform increments,
// retried until all labels are >= 1. Throws BudgetExceeded past max_vertices.
LabelledTree sample_rho_hat(Label l, RandomState& rng, std::uint64_t* attempts = nullptr,
                            std::int64_t max_vertices = 50'000'000);

// rho-hat^(l) restricted to its first `depth` generations, drawn exactly one
// generation at a time (no rejection).
LabelledTree sample_rho_hat_ball(Label l, int depth, RandomState& rng);

// Floating point transition probabilities of the spine chain.
class SpineKernel {
public:
    static long double d(Label l);
    static long double down(Label l);
    static long double stay(Label l);
    static long double up(Label l);
    static Label step(Label y, RandomState& rng);
};

// Law of B_{T,S} under mu, drawn exactly: spine up to generation S and
// independent rho-hat balls on both sides.
LabelledTree sample_mu_ball_tree(int S, RandomState& rng);

struct WindowOptions {
    std::int64_t max_steps = 100'000'000;   // spine steps
    std::int64_t max_vertices = 20'000'000; // generated vertices
};

// Finite window onto a mu-distributed tree that determines the radius-R ball
// of its quadrangulation. Only vertices that carry a label <= R+1 or lead to
// one are generated; subtrees with labels >= R+2 are resolved by exact
// conditioning and kept as single leaves where they hang from a vertex
// labelled R+1.
struct TruncatedSpineTree {
    int R = 0;
    int S = 0;                        // deepest generation with a label <= R+1
    double eps_actual = 0;            // conditioning error of the window
    std::int64_t spine_steps = 0;     // spine length until no further small label
    std::vector<Label> spine;         // labels of the spine vertices kept in the window
    std::vector<std::int64_t> spine_generation;
    LabelledTree skeleton;            // the window as a finite tree
    std::vector<int> generation;      // true generation per skeleton vertex, -1 on compressed paths
};

// Probability that, from spine label y, no label <= R+1 appears on the rest of
// the spine or in the subtrees hanging from it (current vertex included).
long double window_no_hit(Label y, int R);
// Probability that rho-hat^(l) has no non-root vertex with label <= R+1.
long double subtree_no_hit(Label l, int R);

TruncatedSpineTree sample_mu_window(int R, double eps, RandomState& rng, const WindowOptions& opt = {});
nlohmann::json window_to_json(const TruncatedSpineTree& w);

// Radius-R ball of the quadrangulation coded by the window.
BallMap window_quad_ball(const TruncatedSpineTree& w);

RotationMap sample_uniform_quadrangulation(int n, RandomState& rng);

}  // namespace uiq
