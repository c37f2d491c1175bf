// uiq: command-line front end for trees, quadrangulations, exact ball
// probabilities, samplers and experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "uiq/error.hpp"
#include "uiq/exactnum.hpp"
#include "uiq/experiments.hpp"
#include "uiq/maps.hpp"
#include "uiq/samplers.hpp"
#include "uiq/schaeffer.hpp"
#include "uiq/tree.hpp"

using namespace uiq;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kInconclusive = 3;
constexpr int kFileError = 4;
constexpr int kDomainError = 5;
constexpr int kBudget = 6;

class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string format = "text";
    std::string out;
    int samples = 1;
};

std::uint64_t env_seed() {
    const char* s = std::getenv("UIQ_SEED");
    if (!s || !*s) return 1;
    try {
        return std::stoull(s);
    } catch (...) {
        throw DomainError(std::string("UIQ_SEED is not an unsigned integer: ") + s);
    }
}

// Output sink: --out path (relative paths go under UIQ_OUT_DIR when set) or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        std::string full = path;
        const char* dir = std::getenv("UIQ_OUT_DIR");
        if (dir && *dir && path.front() != '/') full = std::string(dir) + "/" + path;
        file_.open(full);
        if (!file_) throw FileError("cannot open output file " + full);
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot read input file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Input from --in (literal) or --in-file (path).
std::string input_text(const std::string& literal, const std::string& path) {
    if (!path.empty()) return read_file(path);
    if (literal.empty()) throw DomainError("no input: give --in or --in-file");
    return literal;
}

bool looks_like_json(const std::string& s) {
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{' || c == '[';
    }
    return false;
}

nlohmann::json ball_to_json(const BallMap& b) {
    nlohmann::json j{{"R", b.R}, {"empty", b.empty()}};
    if (!b.empty()) {
        j["map"] = map_to_json(b.map);
        j["dist"] = b.dist;
        j["boundary"] = b.boundary;
        j["code"] = canonical_code(b);
    }
    return j;
}

// Header record echoed before streamed samples.
void header(std::ostream& os, const Common& c, const std::string& cmd, nlohmann::json params) {
    params["seed"] = c.seed;
    params["jobs"] = c.jobs;
    params["samples"] = c.samples;
    params["format"] = c.format;
    nlohmann::json h{{"header", {{"command", cmd}, {"parameters", params}}}};
    if (c.format == "json") os << h.dump() << '\n';
    else os << "# " << h.dump() << '\n';
}

// Computes sample i on sub-seed split(seed, i) with `jobs` threads and emits in index order.
template <class F>
void stream(std::ostream& os, const Common& c, F make) {
    const int n = c.samples, jobs = std::max(1, std::min(c.jobs, n));
    const int chunk = 256;
    for (int lo = 0; lo < n; lo += chunk) {
        int hi = std::min(n, lo + chunk);
        std::vector<std::string> lines(hi - lo);
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(jobs);
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                try {
                    for (int i = lo + j; i < hi; i += jobs) {
                        RandomState rng(RandomState::split(c.seed, static_cast<std::uint64_t>(i)));
                        lines[i - lo] = make(i, rng);
                    }
                } catch (...) {
                    errs[j] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
        for (auto& l : lines) os << l << '\n';
    }
}

int report_exit(const ExperimentReport& r) {
    switch (r.status()) {
        case Status::Pass: return kOk;
        case Status::Fail: return kFail;
        case Status::Inconclusive: return kInconclusive;
    }
    return kFail;
}

void emit_report(std::ostream& os, const Common& c, const ExperimentReport& r) {
    if (c.format == "csv") os << r.to_csv();
    else os << r.to_json().dump(2) << '\n';
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) v.push_back(std::stoi(item));
    if (v.empty()) throw DomainError("empty list: " + s);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uiq: well-labelled trees, quadrangulations and their local limits"};
    app.require_subcommand(1);
    Common c;
    try {
        c.seed = env_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    auto common = [&](CLI::App* s, bool sampling) {
        s->add_option("--seed", c.seed, "master seed (default: UIQ_SEED or 1)");
        s->add_option("--format", c.format, "output format")->check(CLI::IsMember({"text", "json", "csv"}));
        s->add_option("--out", c.out, "output file (relative to UIQ_OUT_DIR when set)");
        if (sampling) {
            s->add_option("--samples", c.samples, "number of samples")->check(CLI::PositiveNumber);
            s->add_option("--jobs", c.jobs, "worker threads; output order does not depend on it")
                ->check(CLI::PositiveNumber);
        }
    };

    // sample-tree
    auto* st = app.add_subcommand("sample-tree", "sample labelled trees (one per line)");
    common(st, true);
    int st_edges = 10;
    Label st_label = 1;
    std::string st_model = "uniform";
    st->add_option("--edges", st_edges, "number of edges (uniform model)")->check(CLI::NonNegativeNumber);
    st->add_option("--model", st_model, "uniform (T_n), rho-hat (subtree law), mu-ball (B_S under mu)")
        ->check(CLI::IsMember({"uniform", "rho-hat", "mu-ball"}));
    st->add_option("--root-label", st_label, "root label (rho-hat)");
    int st_S = 3;
    st->add_option("--generations", st_S, "S for mu-ball")->check(CLI::NonNegativeNumber);

    // sample-quad
    auto* sq = app.add_subcommand("sample-quad", "sample uniform rooted quadrangulations (map JSON per line)");
    common(sq, true);
    int sq_faces = 10;
    sq->add_option("--faces", sq_faces, "number of faces")->check(CLI::PositiveNumber);

    // sample-uiq-ball
    auto* sb = app.add_subcommand("sample-uiq-ball", "sample balls of the infinite quadrangulation");
    common(sb, true);
    int sb_R = 1;
    double sb_eps = 1e-9;
    std::int64_t sb_steps = 100'000'000;
    sb->add_option("--radius", sb_R, "ball radius")->check(CLI::NonNegativeNumber);
    sb->add_option("--eps", sb_eps, "failure budget of the window");
    sb->add_option("--max-steps", sb_steps, "spine step cap per window");

    // count
    auto* ct = app.add_subcommand("count", "number of well-labelled trees D_n^(l)");
    common(ct, false);
    int ct_edges = 0;
    Label ct_label = 1;
    ct->add_option("--edges", ct_edges, "number of edges")->required()->check(CLI::NonNegativeNumber);
    ct->add_option("--root-label", ct_label, "root label");

    // ball-prob
    auto* bp = app.add_subcommand("ball-prob", "exact probability of a generation-S ball");
    common(bp, false);
    std::string bp_ball;
    int bp_n = 0, bp_S = -1;
    bp->add_option("--ball", bp_ball, "ball tree, e.g. \"(1(2))\"")->required();
    bp->add_option("--n", bp_n, "tree size for the finite law (0: limit only)")->check(CLI::NonNegativeNumber);
    bp->add_option("--S", bp_S, "generation (default: height of the ball)");

    // map-ball
    auto* mb = app.add_subcommand("map-ball", "radius-R ball of a quadrangulation");
    common(mb, false);
    std::string mb_in, mb_file;
    int mb_R = 1;
    mb->add_option("--in", mb_in, "tree text or map JSON");
    mb->add_option("--in-file", mb_file, "file with tree text or map JSON");
    mb->add_option("--radius", mb_R, "ball radius")->check(CLI::NonNegativeNumber);
    bool mb_complete = false;
    mb->add_flag("--complete", mb_complete, "close the ball into a finite quadrangulation");

    // convert
    auto* cv = app.add_subcommand("convert", "convert between trees, contour pairs and maps");
    common(cv, false);
    std::string cv_in, cv_file, cv_to = "quad";
    cv->add_option("--in", cv_in, "tree text, tree JSON or map JSON");
    cv->add_option("--in-file", cv_file, "input file");
    cv->add_option("--to", cv_to, "target")->check(CLI::IsMember({"quad", "tree", "tree-json", "contour"}));

    // verify
    auto* vf = app.add_subcommand("verify", "exhaustive checks over small trees");
    common(vf, false);
    std::string vf_what;
    int vf_max = 5;
    vf->add_option("check", vf_what, "roundtrip | distances | faces | locality")
        ->required()
        ->check(CLI::IsMember({"roundtrip", "distances", "faces", "locality"}));
    vf->add_option("--max-edges", vf_max, "largest tree size")->check(CLI::Range(0, 7));

    // stats
    auto* ss = app.add_subcommand("stats", "run an experiment and print its report");
    common(ss, true);
    std::string ss_exp;
    int ss_steps = 10000, ss_R = 1;
    std::string ss_n = "250,500,1000", ss_S = "1,5,10", ss_k = "50,100,200", ss_alpha = "1/2";
    double ss_eps = 1e-9, ss_tol = 0.02;
    Label ss_lmax = 12;
    std::int64_t ss_maxsteps = 100'000'000;
    ss->add_option("experiment", ss_exp, "experiment id")
        ->required()
        ->check(CLI::IsMember({"spine-scaling", "escape-law", "label-profile", "generation-size",
                               "ball-prob-convergence", "two-route"}));
    ss->add_option("--steps", ss_steps, "spine-scaling: chain length");
    ss->add_option("--alpha", ss_alpha, "escape-law: alpha as p/q");
    ss->add_option("--k", ss_k, "escape-law: comma separated k values");
    ss->add_option("--tol", ss_tol, "escape-law: tolerance at the largest k");
    ss->add_option("--l-max", ss_lmax, "label-profile: largest label");
    ss->add_option("--S", ss_S, "generation-size: comma separated S values");
    ss->add_option("--n", ss_n, "ball-prob-convergence / two-route: comma separated sizes");
    ss->add_option("--radius", ss_R, "two-route: radius");
    ss->add_option("--eps", ss_eps, "two-route: window failure budget");
    ss->add_option("--max-steps", ss_maxsteps, "window spine step cap");
    std::vector<std::string> ss_balls{"(1(1))", "(1(2))", "(1(1)(2))"};
    ss->add_option("--balls", ss_balls, "ball-prob-convergence: ball trees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int r = app.exit(e);
        return r == 0 ? kOk : kUsage;
    }

    try {
        Sink sink(c.out);
        std::ostream& os = sink.os();

        if (*st) {
            header(os, c, "sample-tree", {{"edges", st_edges}, {"model", st_model}, {"root_label", st_label},
                                          {"generations", st_S}});
            stream(os, c, [&](int, RandomState& rng) {
                LabelledTree t;
                if (st_model == "uniform") t = uniform_well_labelled(st_edges, rng);
                else if (st_model == "rho-hat") t = sample_rho_hat(st_label, rng);
                else t = sample_mu_ball_tree(st_S, rng);
                return c.format == "json" ? tree_to_json(t).dump() : serialize_tree(t);
            });
            return kOk;
        }
        if (*sq) {
            header(os, c, "sample-quad", {{"faces", sq_faces}});
            stream(os, c, [&](int, RandomState& rng) {
                auto q = sample_uniform_quadrangulation(sq_faces, rng);
                return c.format == "text" ? canonical_code(q) : map_to_json(q).dump();
            });
            return kOk;
        }
        if (*sb) {
            header(os, c, "sample-uiq-ball", {{"radius", sb_R}, {"eps", sb_eps}, {"max_steps", sb_steps}});
            WindowOptions wo;
            wo.max_steps = sb_steps;
            stream(os, c, [&](int, RandomState& rng) {
                auto w = sample_mu_window(sb_R, sb_eps, rng, wo);
                auto b = window_quad_ball(w);
                if (c.format == "text") return canonical_code(b);
                nlohmann::json j{{"certificate", {{"R", w.R}, {"S", w.S}, {"eps_actual", w.eps_actual},
                                                  {"spine_steps", w.spine_steps}}},
                                 {"ball", ball_to_json(b)}};
                return j.dump();
            });
            return kOk;
        }
        if (*ct) {
            if (ct_edges > 2000) throw DomainError("count: --edges above 2000 is not supported");
            CountTable table(ct_edges);
            auto v = to_string(table.D(ct_edges, ct_label));
            if (c.format == "json") os << nlohmann::json{{"edges", ct_edges}, {"root_label", ct_label}, {"count", v}}.dump() << '\n';
            else os << v << '\n';
            return kOk;
        }
        if (*bp) {
            auto t = parse_tree(bp_ball);
            Rational lim = mu_ball_prob(t, bp_S);
            nlohmann::json j{{"ball", serialize_tree(t)}, {"limit", to_string(lim)}, {"limit_float", lim.get_d()}};
            if (bp_n > 0) {
                CountTable table(bp_n);
                Rational p = mu_n_ball_prob(t, bp_n, table, bp_S);
                j["n"] = bp_n;
                j["finite"] = to_string(p);
                j["finite_float"] = p.get_d();
            }
            if (c.format == "json") os << j.dump() << '\n';
            else {
                os << to_string(lim) << '\n';
                if (bp_n > 0) os << j["finite"].get<std::string>() << '\n';
            }
            return kOk;
        }
        if (*mb) {
            auto text = input_text(mb_in, mb_file);
            RotationMap q = looks_like_json(text) ? map_from_json(nlohmann::json::parse(text)) : phi(parse_tree(text));
            auto b = ball(q, mb_R);
            if (mb_complete) {
                auto k = krikun_complete(b);
                os << (c.format == "text" ? canonical_code(k) : map_to_json(k).dump()) << '\n';
            } else {
                os << (c.format == "text" ? canonical_code(b) : ball_to_json(b).dump()) << '\n';
            }
            return kOk;
        }
        if (*cv) {
            auto text = input_text(cv_in, cv_file);
            LabelledTree t;
            bool have_tree = true;
            RotationMap q;
            if (looks_like_json(text)) {
                auto j = nlohmann::json::parse(text);
                if (j.contains("twin")) {
                    q = map_from_json(j);
                    have_tree = false;
                } else {
                    t = tree_from_json(j);
                }
            } else {
                t = parse_tree(text);
            }
            if (!have_tree) t = phi_inverse(q);
            if (cv_to == "quad") {
                auto m = have_tree ? phi(t) : q;
                os << (c.format == "text" ? canonical_code(m) : map_to_json(m).dump()) << '\n';
            } else if (cv_to == "tree") {
                os << serialize_tree(t) << '\n';
            } else if (cv_to == "tree-json") {
                os << tree_to_json(t).dump() << '\n';
            } else {
                auto cp = contour_pair(t);
                os << nlohmann::json{{"C", cp.C}, {"V", cp.V}}.dump() << '\n';
            }
            return kOk;
        }
        if (*vf) {
            bool ok = true;
            nlohmann::json rows = nlohmann::json::array();
            CountTable table(std::max(vf_max, 1));
            for (int n = vf_what == "locality" ? 1 : 0; n <= vf_max; ++n) {
                auto trees = enumerate_trees(n, 1, true);
                nlohmann::json row{{"n", n}, {"trees", trees.size()}};
                if (vf_what == "roundtrip") {
                    // 2 3^n Cat(n) / (n+2)
                    mpz_class cat;
                    mpz_bin_uiui(cat.get_mpz_t(), 2 * n, n);
                    cat /= n + 1;
                    mpz_class p3;
                    mpz_ui_pow_ui(p3.get_mpz_t(), 3, n);
                    mpz_class formula = 2 * p3 * cat / (n + 2);
                    bool counts = formula == static_cast<long>(trees.size()) && table.D(n, 1) == formula;
                    std::set<std::string> codes;
                    bool inverse = true;
                    for (auto& t : trees) {
                        if (n == 0) continue;
                        auto q = phi(t);
                        codes.insert(canonical_code(q));
                        inverse &= phi_inverse(q) == t;
                    }
                    bool injective = n == 0 || codes.size() == trees.size();
                    row["formula"] = formula.get_str();
                    row["counts_match"] = counts;
                    row["injective"] = injective;
                    row["inverse"] = inverse;
                    ok &= counts && injective && inverse;
                } else if (vf_what == "distances") {
                    bool good = true;
                    for (auto& t : trees) {
                        if (n == 0) continue;
                        auto q = phi(t);
                        auto dist = bfs_distances(q);
                        auto vd = phi_vertex_darts(t);
                        for (std::size_t v = 0; v < t.num_vertices(); ++v)
                            good &= dist[q.vertex(vd[v])] == t.label(static_cast<int>(v));
                    }
                    row["distances_equal_labels"] = good;
                    ok &= good;
                } else if (vf_what == "faces") {
                    bool good = true;
                    for (auto& t : trees) {
                        if (n == 0) continue;
                        auto lit = phi_literal(t);
                        good &= lit.bad_faces.empty() && lit.chords_planar;
                    }
                    row["faces_ok"] = good;
                    ok &= good;
                } else {
                    long admissible = 0, violations = 0;
                    for (auto& t : trees)
                        for (int S = 1; S <= 2; ++S)
                            for (int R = 1; R <= 2; ++R) {
                                if (in_omega(t, S, R)) continue;
                                ++admissible;
                                violations += canonical_code(ball(phi(t), R)) != canonical_code(window_ball(t, S + 1, R));
                            }
                    row["admissible"] = admissible;
                    row["violations"] = violations;
                    ok &= violations == 0;
                }
                rows.push_back(row);
            }
            nlohmann::json j{{"check", vf_what}, {"max_edges", vf_max}, {"status", ok ? "pass" : "fail"}, {"rows", rows}};
            if (c.format == "json") os << j.dump(2) << '\n';
            else {
                for (auto& r : rows) os << r.dump() << '\n';
                os << (ok ? "pass" : "fail") << '\n';
            }
            return ok ? kOk : kFail;
        }
        if (*ss) {
            ExperimentReport r;
            if (ss_exp == "spine-scaling") r = spine_scaling(ss_steps, c.samples, c.seed, c.jobs);
            else if (ss_exp == "escape-law") {
                std::vector<Label> ks;
                for (int k : parse_int_list(ss_k)) ks.push_back(k);
                Rational alpha(ss_alpha);
                alpha.canonicalize();
                r = escape_law(alpha, ks, ss_tol);
            } else if (ss_exp == "label-profile") r = label_profile(ss_lmax, c.samples, c.seed, ss_maxsteps);
            else if (ss_exp == "generation-size") r = generation_size(parse_int_list(ss_S), c.samples, c.seed);
            else if (ss_exp == "ball-prob-convergence") {
                std::vector<LabelledTree> balls;
                for (auto& b : ss_balls) balls.push_back(parse_tree(b));
                r = ball_prob_convergence(balls, parse_int_list(ss_n));
            } else {
                TwoRouteOptions o;
                o.max_steps = ss_maxsteps;
                o.jobs = c.jobs;
                r = two_route_comparison(ss_R, parse_int_list(ss_n), c.samples, ss_eps, c.seed, o);
            }
            emit_report(os, c, r);
            return report_exit(r);
        }
    } catch (const FileError& e) {
        std::cerr << "file error: " << e.what() << '\n';
        return kFileError;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kBudget;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kDomainError;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kDomainError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
