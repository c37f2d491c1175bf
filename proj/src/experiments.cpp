#include "uiq/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "uiq/error.hpp"
#include "uiq/maps.hpp"
#include "uiq/schaeffer.hpp"

namespace uiq {

std::string to_string(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Inconclusive: return "inconclusive";
    }
    return "?";
}

Status ExperimentReport::status() const {
    bool inc = false;
    for (auto& c : checks) {
        if (c.status == Status::Fail) return Status::Fail;
        inc |= c.status == Status::Inconclusive;
    }
    return inc ? Status::Inconclusive : Status::Pass;
}

void ExperimentReport::check(const std::string& name, bool ok, const std::string& detail) {
    checks.push_back({name, ok ? Status::Pass : Status::Fail, detail});
}

void ExperimentReport::inconclusive(const std::string& name, const std::string& detail) {
    checks.push_back({name, Status::Inconclusive, detail});
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json pts = nlohmann::json::array(), cks = nlohmann::json::array();
    for (auto& p : points) {
        nlohmann::json j{{"series", p.series}, {"x", p.x}, {"estimate", p.estimate}, {"stderr", p.stderr_}};
        if (p.has_target) j["target"] = p.target;
        pts.push_back(j);
    }
    for (auto& c : checks) cks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
    nlohmann::json j{{"id", id},         {"parameters", parameters}, {"seed", seed},
                     {"points", pts},    {"checks", cks},            {"status", to_string(status())},
                     {"wall_seconds", wall_seconds}};
    if (!extra.is_null()) j["extra"] = extra;
    return j;
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "id,series,x,estimate,stderr,target\n";
    for (auto& p : points) {
        os << id << ',' << p.series << ',' << p.x << ',' << p.estimate << ',' << p.stderr_ << ',';
        if (p.has_target) os << p.target;
        os << '\n';
    }
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Runs body(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&, j] {
            try {
                for (int i = j; i < n; i += jobs) body(i);
            } catch (...) {
                errs[j] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

ReportPoint point(const std::string& s, double x, double est, double se) {
    ReportPoint p;
    p.series = s;
    p.x = x;
    p.estimate = est;
    p.stderr_ = se;
    return p;
}

ReportPoint point(const std::string& s, double x, double est, double se, double target) {
    ReportPoint p = point(s, x, est, se);
    p.target = target;
    p.has_target = true;
    return p;
}

}  // namespace

ExperimentReport spine_scaling(int steps, int paths, std::uint64_t seed, int jobs) {
    if (steps < 1000 || paths < 1000) throw DomainError("spine_scaling: need steps >= 1000 and paths >= 1000");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "spine_scaling";
    rep.parameters = {{"steps", steps}, {"paths", paths}, {"jobs", jobs}};
    rep.seed = seed;

    // cumulative step law per label; labels never exceed steps + 1
    std::vector<std::array<double, 2>> cum(static_cast<std::size_t>(steps) + 2);
    for (Label l = 1; l <= steps + 1; ++l) {
        long double q = SpineKernel::down(l), s = SpineKernel::stay(l);
        cum[l] = {static_cast<double>(q), static_cast<double>(q + s)};
    }
    const int marks[3] = {steps / 4, steps / 2, steps};
    std::vector<std::array<std::int64_t, 3>> y_at(paths);
    parallel_for(paths, jobs, [&](int p) {
        RandomState rng(RandomState::split(seed, static_cast<std::uint64_t>(p)));
        Label y = 1;
        int m = 0;
        for (int n = 1; n <= steps; ++n) {
            double u = rng.uniform();
            y += u < cum[y][0] ? -1 : u < cum[y][1] ? 0 : 1;
            if (n == marks[m]) y_at[p][m++] = y;
        }
    });
    for (int m = 0; m < 3; ++m) {
        unsigned __int128 s2 = 0, s4 = 0;
        for (auto& a : y_at) {
            unsigned __int128 y2 = static_cast<unsigned __int128>(a[m] * a[m]);
            s2 += y2;
            s4 += y2 * y2;
        }
        double n = marks[m], mean = static_cast<double>(s2) / paths;
        double var = static_cast<double>(s4) / paths - mean * mean;
        double ratio = mean / (6 * n), se = std::sqrt(var / paths) / (6 * n);
        rep.points.push_back(point("E[Y_n^2]/(6n)", n, ratio, se, 1.0));
        rep.check("ratio in [0.8, 1.2] at n = " + std::to_string(marks[m]), ratio >= 0.8 && ratio <= 1.2,
                  "ratio " + fmt(ratio) + " +- " + fmt(se));
    }
    {
        auto& a = rep.points[0];
        auto& c = rep.points[2];
        double diff = std::abs(c.estimate - a.estimate), tol = 3 * std::hypot(a.stderr_, c.stderr_);
        rep.check("ratio trend flat in n", diff <= tol, "difference " + fmt(diff) + ", 3 sigma " + fmt(tol));
    }
    // exact Lamperti constants at l = 100
    auto row = kernel_row(100);
    double drift = Rational((row.p - row.q) * 100).get_d(), var = Rational(row.p + row.q).get_d();
    rep.points.push_back(point("l*(p_l - q_l)", 100, drift, 0, 8.0 / 3));
    rep.points.push_back(point("p_l + q_l", 100, var, 0, 2.0 / 3));
    rep.check("drift l*m1(l) within 10% of 8/3 at l = 100", std::abs(drift / (8.0 / 3) - 1) <= 0.1, fmt(drift));
    rep.check("variance m2(l) within 10% of 2/3 at l = 100", std::abs(var / (2.0 / 3) - 1) <= 0.1, fmt(var));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport escape_law(const Rational& alpha, const std::vector<Label>& k_list, double tol) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("escape_law: alpha must lie in (0,1)");
    if (k_list.empty()) throw DomainError("escape_law: empty k list");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "escape_law";
    rep.parameters = {{"alpha", to_string(alpha)}, {"k_list", k_list}, {"tol", tol}};
    const double a = alpha.get_d(), limit = 1 - std::pow(a, 7);
    std::vector<double> vals;
    for (Label k : k_list) {
        mpz_class j = mpz_class(k * alpha.get_num()) / alpha.get_den();
        Label jj = j.get_si();
        if (jj < 1) throw DomainError("escape_law: floor(alpha k) must be >= 1");
        auto br = hitting_prob_infinite(k, jj);
        double v = static_cast<double>(br.value());
        vals.push_back(v);
        rep.points.push_back(point("P_k[T_j = inf]", static_cast<double>(k), v,
                                   static_cast<double>(br.upper - br.lower) / 2, limit));
    }
    bool mono = true;
    for (std::size_t i = 1; i < vals.size(); ++i)
        mono &= std::abs(vals[i] - limit) <= std::abs(vals[i - 1] - limit) && (vals[i] - vals[i - 1]) * (limit - vals[0]) >= 0;
    rep.check("monotone in k toward 1 - alpha^7", mono, "limit " + fmt(limit));
    double gap = std::abs(vals.back() - limit);
    rep.check("within " + fmt(tol) + " of 1 - alpha^7 at k = " + std::to_string(k_list.back()), gap <= tol,
              "value " + fmt(vals.back()) + ", gap " + fmt(gap));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport label_profile(Label l_max, int samples, std::uint64_t seed, std::int64_t max_steps) {
    if (l_max < 8) throw DomainError("label_profile: l_max must be >= 8");
    if (samples < 1) throw DomainError("label_profile: samples must be >= 1");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "label_profile";
    rep.parameters = {{"l_max", l_max}, {"samples", samples}, {"max_steps", max_steps}};
    rep.seed = seed;
    std::vector<double> s1(l_max + 1), s2(l_max + 1);
    long used = 0, exceeded = 0;
    bool root_seen = true;
    WindowOptions opt;
    opt.max_steps = max_steps;
    for (int i = 0; i < samples; ++i) {
        RandomState rng(RandomState::split(seed, static_cast<std::uint64_t>(i)));
        TruncatedSpineTree w;
        try {
            w = sample_mu_window(static_cast<int>(l_max), 1e-9, rng, opt);
        } catch (const BudgetExceeded&) {
            ++exceeded;
            continue;
        }
        ++used;
        std::vector<double> c(l_max + 1);
        for (Label l : w.skeleton.labels())
            if (l <= l_max) c[l] += 1;
        root_seen &= c[1] >= 1;
        for (Label l = 1; l <= l_max; ++l) s1[l] += c[l], s2[l] += c[l] * c[l];
    }
    if (used == 0) throw BudgetExceeded("label_profile: every window exceeded the budget");
    std::vector<double> mean(l_max + 1);
    double C = 0;
    bool increasing = true;
    for (Label l = 1; l <= l_max; ++l) {
        mean[l] = s1[l] / used;
        double se = std::sqrt(std::max(0.0, s2[l] / used - mean[l] * mean[l]) / used);
        rep.points.push_back(point("E[N_l]", static_cast<double>(l), mean[l], se));
        if (l >= 4) C = std::max(C, mean[l] / std::pow(static_cast<double>(l), 3));
        if (l >= 2) increasing &= mean[l] > mean[l - 1];
    }
    // least squares slope of log E[N_l] on log l over [4, l_max]
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (Label l = 4; l <= l_max; ++l) {
        double x = std::log(static_cast<double>(l)), y = std::log(mean[l]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.points.push_back(point("log-log slope", static_cast<double>(l_max), slope, 0));
    rep.extra = {{"windows_used", used}, {"budget_exceeded", exceeded}, {"C", C}};
    rep.check("N_1 >= 1 in every window", root_seen, "");
    rep.check("slope over [4, l_max] in [2.2, 3.8]", slope >= 2.2 && slope <= 3.8, "slope " + fmt(slope));
    rep.check("E[N_l] increasing in l", increasing, "");
    if (static_cast<double>(exceeded) > 0.01 * samples)
        rep.inconclusive("budget", std::to_string(exceeded) + " windows exceeded the step cap");
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport generation_size(const std::vector<int>& S_list, int samples, std::uint64_t seed) {
    if (S_list.empty() || samples < 2) throw DomainError("generation_size: need S values and samples >= 2");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "generation_size";
    rep.parameters = {{"S_list", S_list}, {"samples", samples}};
    rep.seed = seed;
    const int S_max = *std::max_element(S_list.begin(), S_list.end());
    if (*std::min_element(S_list.begin(), S_list.end()) < 0) throw DomainError("generation_size: S must be >= 0");
    std::vector<double> s1(S_max + 1), s2(S_max + 1);
    std::vector<long> smallest(S_max + 1, 1L << 40);
    for (int i = 0; i < samples; ++i) {
        RandomState rng(RandomState::split(seed, static_cast<std::uint64_t>(i)));
        auto t = sample_mu_ball_tree(S_max, rng);
        std::vector<long> g(S_max + 1);
        for (std::size_t v = 0; v < t.num_vertices(); ++v) ++g[t.depth(static_cast<int>(v))];
        for (int S = 0; S <= S_max; ++S) {
            s1[S] += g[S];
            s2[S] += static_cast<double>(g[S]) * g[S];
            smallest[S] = std::min(smallest[S], g[S]);
        }
    }
    for (int S : S_list) {
        double mean = s1[S] / samples, se = std::sqrt(std::max(0.0, s2[S] / samples - mean * mean) / samples);
        rep.points.push_back(point("E|g_S|", S, mean, se, 4.0 * S + 1));
        rep.check("E|g_S| <= 4S + 1 + 3 sigma at S = " + std::to_string(S), mean <= 4.0 * S + 1 + 3 * se,
                  "mean " + fmt(mean) + " +- " + fmt(se));
        rep.check("|g_S| >= 1 at S = " + std::to_string(S), smallest[S] >= 1, "");
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport ball_prob_convergence(const std::vector<LabelledTree>& balls, const std::vector<int>& n_list) {
    if (balls.empty() || n_list.empty()) throw DomainError("ball_prob_convergence: empty input");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw DomainError("ball_prob_convergence: n list must increase");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "ball_prob_convergence";
    nlohmann::json bl = nlohmann::json::array();
    for (auto& b : balls) bl.push_back(serialize_tree(b));
    rep.parameters = {{"balls", bl}, {"n_list", n_list}};
    CountTable table(n_list.back());
    nlohmann::json exact = nlohmann::json::array();
    for (auto& b : balls) {
        const std::string name = serialize_tree(b);
        Rational limit = mu_ball_prob(b), printed = mu_ball_prob_printed(b);
        std::vector<Rational> gaps, pgaps;
        nlohmann::json rows = nlohmann::json::array();
        for (int n : n_list) {
            Rational p = mu_n_ball_prob(b, n, table);
            Rational g = abs(Rational(p - limit)), pg = abs(Rational(p - printed));
            gaps.push_back(g);
            pgaps.push_back(pg);
            rep.points.push_back(point("mu_n " + name, n, p.get_d(), 0, limit.get_d()));
            rows.push_back({{"n", n}, {"mu_n", to_string(p)}, {"gap", g.get_d()}, {"gap_printed", pg.get_d()}});
        }
        exact.push_back({{"ball", name}, {"limit", to_string(limit)}, {"limit_printed", to_string(printed)}, {"rows", rows}});
        bool dec = true;
        for (std::size_t i = 1; i < gaps.size(); ++i) dec &= gaps[i] < gaps[i - 1];
        rep.check("gap decreasing for " + name, dec, "");
        Rational rel = gaps.back() / limit;
        rep.check("final gap < 10% of limit for " + name, rel < Rational(1, 10), "relative gap " + fmt(rel.get_d()));
        rep.check("printed d gives the larger final gap for " + name, pgaps.back() > gaps.back(),
                  "recursion " + fmt(gaps.back().get_d()) + ", printed " + fmt(pgaps.back().get_d()));
    }
    rep.extra = {{"exact", exact}};
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

double tv_distance(const std::map<std::string, long>& a, long na, const std::map<std::string, long>& b, long nb) {
    if (na <= 0 || nb <= 0) throw DomainError("tv_distance: empty sample");
    double s = 0;
    for (auto& [k, c] : a) {
        auto it = b.find(k);
        double pb = it == b.end() ? 0 : static_cast<double>(it->second) / nb;
        s += std::abs(static_cast<double>(c) / na - pb);
    }
    for (auto& [k, c] : b)
        if (!a.count(k)) s += static_cast<double>(c) / nb;
    return s / 2;
}

namespace {

// Ball laws: full codes plus two coarse projections.
struct Tally {
    std::map<std::string, long> code, degree, faces;
    long n = 0;

    void add(const std::string& c, const BallMap& b) {
        ++code[c];
        ++degree[std::to_string(b.empty() ? 0 : b.map.degree(b.map.root_vertex()))];
        long f = 0;
        if (!b.empty())
            for (int x = 0; x < b.map.num_faces(); ++x) f += b.retained[b.map.face_dart(x)] != 0;
        ++faces[std::to_string(f)];
        ++n;
    }
    double p_degree1() const {
        auto it = degree.find("1");
        return it == degree.end() ? 0 : static_cast<double>(it->second) / n;
    }
};

struct Sample {
    std::string code;
    BallMap ball;
    bool over = false;
};

}  // namespace

ExperimentReport two_route_comparison(int R, const std::vector<int>& n_list, int samples, double eps,
                                      std::uint64_t seed, const TwoRouteOptions& opt) {
    if (R < 1 || R > 2) throw DomainError("two_route_comparison: R must be 1 or 2");
    if (n_list.empty() || samples < 1) throw DomainError("two_route_comparison: need sizes and samples");
    if (!(eps > 0 && eps <= 1e-6)) throw DomainError("two_route_comparison: eps must lie in (0, 1e-6]");
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "two_route_comparison";
    rep.parameters = {{"R", R},           {"n_list", n_list},           {"samples", samples},
                      {"eps", eps},       {"max_steps", opt.max_steps}, {"tv_threshold", opt.tv_threshold},
                      {"sanity_n", opt.sanity_n}};
    rep.seed = seed;

    // Draws `count` balls from `draw` on independent sub-seeds of `stream`.
    auto collect = [&](int count, std::uint64_t stream, const std::function<BallMap(RandomState&)>& draw,
                       long* exceeded) {
        std::vector<Sample> out(count);
        parallel_for(count, opt.jobs, [&](int i) {
            RandomState rng(RandomState::split(RandomState::split(seed, stream), static_cast<std::uint64_t>(i)));
            try {
                out[i].ball = draw(rng);
                out[i].code = canonical_code(out[i].ball);
                out[i].ball.boundary.clear();
            } catch (const BudgetExceeded&) {
                out[i].over = true;
            }
        });
        Tally t;
        for (auto& s : out) {
            if (s.over) {
                if (exceeded) ++*exceeded;
                continue;
            }
            t.add(s.code, s.ball);
        }
        return t;
    };

    WindowOptions wo;
    wo.max_steps = opt.max_steps;
    long exceeded = 0;
    Tally a = collect(samples, 0, [&](RandomState& rng) { return window_quad_ball(sample_mu_window(R, eps, rng, wo)); },
                      &exceeded);
    if (a.n == 0) throw BudgetExceeded("two_route_comparison: every window exceeded the budget");
    auto uniform_ball = [&](int n) {
        return [n, R](RandomState& rng) { return ball(sample_uniform_quadrangulation(n, rng), R); };
    };

    nlohmann::json tvs = nlohmann::json::array();
    std::vector<double> tv;
    double floor_last = 0;
    Tally last;
    for (std::size_t j = 0; j < n_list.size(); ++j) {
        Tally b = collect(samples, 1 + j, uniform_ball(n_list[j]), nullptr);
        double t = tv_distance(a.code, a.n, b.code, b.n);
        std::map<std::string, long> support = a.code;
        for (auto& [k, c] : b.code) support[k] += c;
        double floor = std::sqrt(static_cast<double>(support.size()) / samples);
        double td = tv_distance(a.degree, a.n, b.degree, b.n), tf = tv_distance(a.faces, a.n, b.faces, b.n);
        tv.push_back(t);
        floor_last = floor;
        rep.points.push_back(point("TV", n_list[j], t, floor));
        rep.points.push_back(point("TV root degree", n_list[j], td, 0));
        rep.points.push_back(point("TV face count", n_list[j], tf, 0));
        tvs.push_back({{"n", n_list[j]},
                       {"tv", t},
                       {"noise_floor", floor},
                       {"support", support.size()},
                       {"tv_root_degree", td},
                       {"tv_face_count", tf}});
        if (j + 1 == n_list.size()) last = std::move(b);
    }
    // same-route baseline: a second independent sample at the largest n
    {
        Tally b2 = collect(samples, 500, uniform_ball(n_list.back()), nullptr);
        double t = tv_distance(last.code, last.n, b2.code, b2.n);
        rep.points.push_back(point("TV baseline (b vs b)", n_list.back(), t, 0));
        rep.extra["tv_baseline"] = t;
        rep.extra["tv_baseline_root_degree"] = tv_distance(last.degree, last.n, b2.degree, b2.n);
        rep.extra["tv_baseline_face_count"] = tv_distance(last.faces, last.n, b2.faces, b2.n);
    }

    if (floor_last >= opt.tv_threshold) {
        rep.inconclusive("noise floor below threshold",
                         "floor " + fmt(floor_last) + " >= " + fmt(opt.tv_threshold) + "; more samples needed");
    }
    bool dec = true;
    for (std::size_t j = 1; j < tv.size(); ++j) dec &= tv[j] < tv[j - 1];
    std::string tvs_text;
    for (std::size_t j = 0; j < tv.size(); ++j) tvs_text += (j ? ", " : "") + fmt(tv[j]);
    if (rep.extra.contains("tv_baseline"))
        tvs_text += "; same-route baseline " + fmt(rep.extra["tv_baseline"].get<double>());
    rep.check("TV decreasing along n", dec, tvs_text);
    rep.check("final TV < " + fmt(opt.tv_threshold), tv.back() < opt.tv_threshold,
              "TV " + fmt(tv.back()) + ", noise floor " + fmt(floor_last));

    double pa = a.p_degree1(), pb = last.p_degree1();
    double se = std::sqrt(pa * (1 - pa) / a.n + pb * (1 - pb) / last.n);
    rep.points.push_back(point("P(root degree 1) route a", 0, pa, std::sqrt(pa * (1 - pa) / a.n)));
    rep.points.push_back(point("P(root degree 1) route b", n_list.back(), pb, std::sqrt(pb * (1 - pb) / last.n)));
    rep.check("root degree 1 agrees within 3 sigma", std::abs(pa - pb) <= 3 * se,
              fmt(pa) + " vs " + fmt(pb) + ", sigma " + fmt(se));

    // sanity leg: route (b) at small n against the exact law on T_n
    {
        const int count = opt.sanity_samples > 0 ? opt.sanity_samples : samples;
        Tally s = collect(count, 999, uniform_ball(opt.sanity_n), nullptr);
        std::map<std::string, long> exact;
        auto all = enumerate_trees(opt.sanity_n, 1, true);
        for (auto& t : all) ++exact[canonical_code(ball(phi(t), R))];
        double t = tv_distance(s.code, s.n, exact, static_cast<long>(all.size()));
        double floor = std::sqrt(static_cast<double>(exact.size()) / count);
        rep.points.push_back(point("sanity TV", opt.sanity_n, t, floor));
        rep.check("sanity leg at n = " + std::to_string(opt.sanity_n) + " within noise floor", t < floor,
                  "TV " + fmt(t) + ", floor " + fmt(floor));
    }
    rep.extra["tv"] = tvs;
    rep.extra["windows_used"] = a.n;
    rep.extra["budget_exceeded"] = exceeded;
    rep.extra["support_a"] = a.code.size();
    if (static_cast<double>(exceeded) > 0.01 * samples)
        rep.inconclusive("budget", std::to_string(exceeded) + " windows exceeded the step cap");
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

}  // namespace uiq
