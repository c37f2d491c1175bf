#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "uiq/exactnum.hpp"
#include "uiq/samplers.hpp"
#include "uiq/tree.hpp"

namespace uiq {

enum class Status { Pass, Fail, Inconclusive };
std::string to_string(Status s);

struct ReportPoint {
    std::string series;  // what is estimated
    double x = 0;        // abscissa (n, l, k, ...)
    double estimate = 0;
    double stderr_ = 0;  // 0 for exact values
    double target = 0;
    bool has_target = false;
};

struct ReportCheck {
    std::string name;
    Status status = Status::Pass;
    std::string detail;
};

struct ExperimentReport {
    std::string id;
    nlohmann::json parameters;
    std::uint64_t seed = 0;
    std::vector<ReportPoint> points;
    std::vector<ReportCheck> checks;
    nlohmann::json extra;  // experiment specific data (e.g. distributions)
    double wall_seconds = 0;

    // Fail if any check fails, else inconclusive if any is, else pass.
    Status status() const;
    void check(const std::string& name, bool ok, const std::string& detail);
    void inconclusive(const std::string& name, const std::string& detail);
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// Second moment of the spine chain: E[Y_n^2]/(6n) at n = steps/4, steps/2, steps,
// plus the exact drift l*(p_l - q_l) and variance p_l + q_l at l = 100.
// Paths are split over `jobs` threads with per-path seeds; sums are integers,
// so the report does not depend on jobs.
ExperimentReport spine_scaling(int steps, int paths, std::uint64_t seed, int jobs = 1);

// Exact P_k[T_{floor(alpha k)} = infinity] against 1 - alpha^7.
ExperimentReport escape_law(const Rational& alpha, const std::vector<Label>& k_list, double tol);

// Mean number of vertices per label from windows with R = l_max, log-log slope over [4, l_max].
ExperimentReport label_profile(Label l_max, int samples, std::uint64_t seed, std::int64_t max_steps = 100'000'000);

// Mean size of generation S under mu for each S in S_list.
ExperimentReport generation_size(const std::vector<int>& S_list, int samples, std::uint64_t seed);

// Exact ball probabilities for uniform trees of size n against the limit,
// with the limit under d_printed alongside.
ExperimentReport ball_prob_convergence(const std::vector<LabelledTree>& balls, const std::vector<int>& n_list);

struct TwoRouteOptions {
    std::int64_t max_steps = 100'000'000;  // per window
    double tv_threshold = 0.05;
    int sanity_n = 2;
    int sanity_samples = -1;  // defaults to samples
    int jobs = 1;
};

// Ball law of the infinite map from mu windows (route a) against uniform
// quadrangulations with n faces (route b), compared in total variation.
ExperimentReport two_route_comparison(int R, const std::vector<int>& n_list, int samples, double eps,
                                      std::uint64_t seed, const TwoRouteOptions& opt = {});

// Plug-in total variation distance between two empirical laws.
double tv_distance(const std::map<std::string, long>& a, long na, const std::map<std::string, long>& b, long nb);

}  // namespace uiq
