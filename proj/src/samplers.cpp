#include "uiq/samplers.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "uiq/error.hpp"
#include "uiq/exactnum.hpp"
#include "uiq/schaeffer.hpp"

namespace uiq {

std::uint64_t RandomState::split(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

// Growable plane tree with linked child lists; converted to preorder at the end.
struct Forest {
    std::vector<Label> label;
    std::vector<int> gen, first, last, next;
    std::vector<char> alive;

    int add(Label l, int g) {
        label.push_back(l);
        gen.push_back(g);
        first.push_back(-1);
        last.push_back(-1);
        next.push_back(-1);
        alive.push_back(1);
        return static_cast<int>(label.size()) - 1;
    }
    void attach(int v, int c) {
        if (last[v] < 0) first[v] = c;
        else next[last[v]] = c;
        last[v] = c;
    }
    int add_child(int v, Label l) {
        int c = add(l, gen[v] < 0 ? -1 : gen[v] + 1);
        attach(v, c);
        return c;
    }

    LabelledTree to_tree(std::vector<int>* gen_out = nullptr) const {
        TreeBuilder b(label[0]);
        if (gen_out) gen_out->assign(1, gen[0]);
        std::vector<std::pair<int, int>> stack{{0, first[0]}};  // vertex, next child to visit
        std::vector<int> img{0};
        while (!stack.empty()) {
            int& c = stack.back().second;
            while (c >= 0 && !alive[c]) c = next[c];
            if (c < 0) {
                stack.pop_back();
                img.pop_back();
                continue;
            }
            int u = c;
            c = next[c];
            img.push_back(b.add_child(img.back(), label[u]));
            if (gen_out) gen_out->push_back(gen[u]);
            stack.push_back({u, first[u]});
        }
        return std::move(b).build();
    }
};

int pick(const long double* wts, int k, RandomState& rng) {
    long double tot = 0;
    for (int i = 0; i < k; ++i) tot += wts[i];
    long double u = rng.uniform() * tot;
    for (int i = 0; i < k; ++i) {
        if (u < wts[i]) return i;
        u -= wts[i];
    }
    for (int i = k; i-- > 0;)
        if (wts[i] > 0) return i;
    return 0;
}

// Children list of an unconditioned rho-hat vertex with label l: count and labels.
void free_children(Forest& f, int v, RandomState& rng) {
    const Label l = f.label[v];
    const long double stop = 1 / w_float(l);
    std::array<long double, 4> wt{stop, w_float(l - 1) / 12, w_float(l) / 12, w_float(l + 1) / 12};
    for (;;) {
        int c = pick(wt.data(), 4, rng);
        if (c == 0) return;
        f.add_child(v, l + c - 2);
    }
}

// Grows the subtree below v one generation at a time until `depth` generations.
void free_subtree(Forest& f, int v, int depth, RandomState& rng) {
    if (depth <= 0) return;
    std::vector<std::pair<int, int>> todo{{v, depth}};
    while (!todo.empty()) {
        auto [u, dep] = todo.back();
        todo.pop_back();
        int before = f.last[u];
        free_children(f, u, rng);
        if (dep > 1)
            for (int c = before < 0 ? f.first[u] : f.next[before]; c >= 0; c = f.next[c]) todo.push_back({c, dep - 1});
    }
}

}  // namespace

LabelledTree uniform_plane_tree(int n, RandomState& rng) {
    require(n >= 0, "uniform_plane_tree: n must be >= 0");
    std::vector<int> steps(2 * n + 1, -1);
    std::fill(steps.begin(), steps.begin() + n, 1);
    std::shuffle(steps.begin(), steps.end(), rng.engine());
    // rotate to start just after the first minimum of the walk
    int s = 0, best = 1, at = 0;
    for (int i = 0; i < 2 * n + 1; ++i) {
        s += steps[i];
        if (s < best) best = s, at = i;
    }
    TreeBuilder b(1);
    std::vector<int> stack{0};
    for (int i = 1; i <= 2 * n; ++i) {
        int x = steps[(at + i) % (2 * n + 1)];
        if (x > 0) stack.push_back(b.add_child(stack.back(), 1));
        else stack.pop_back();
    }
    return std::move(b).build();
}

LabelledTree uniform_well_labelled(int n, RandomState& rng, std::uint64_t* attempts) {
    require(n >= 0, "uniform_well_labelled: n must be >= 0");
    std::uint64_t tries = 0;
    for (;;) {
        ++tries;
        TreeBuilder b(1);
        std::vector<int> stack{0};
        bool ok = true;
        long long h = 0;
        for (long long r = 2LL * n; r > 0 && ok; --r) {
            // probability that a uniform Dyck path at height h with r steps left goes up
            double up = static_cast<double>((h + 2) * (r - h)) / static_cast<double>(2 * r * (h + 1));
            if (rng.uniform() < up) {
                Label l = b.label(stack.back()) + rng.increment();
                if (l < 1) ok = false;
                else stack.push_back(b.add_child(stack.back(), l)), ++h;
            } else {
                stack.pop_back();
                --h;
            }
        }
        if (ok) {
            if (attempts) *attempts = tries;
            return std::move(b).build();
        }
    }
}

LabelledTree random_well_labelled(int n, RandomState& rng) {
    require(n >= 0, "random_well_labelled: n must be >= 0");
    if (n == 0) return LabelledTree(1);
    std::vector<int> parent{-1};
    std::vector<Label> label{0};
    for (int k = 1; k <= n; ++k) {
        parent.push_back(static_cast<int>(rng.below(k)));
        label.push_back(label[parent.back()] + rng.increment());
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
            if (u != up) {
                next = u;
                break;
            }
        }
        if (next < 0) {
            stack.pop_back();
            walk.push_back(stack.back());
        } else {
            stack.push_back(next);
            walk.push_back(next);
        }
    }
    std::size_t k0 = 0;
    for (std::size_t i = 0; i < walk.size(); ++i)
        if (label[walk[i]] < label[walk[k0]]) k0 = i;
    const Label shift = 1 - label[walk[k0]];
    TreeBuilder b(1);
    std::vector<int> path{walk[k0]}, img{0};
    for (std::size_t i = 1; i < walk.size(); ++i) {
        int v = walk[(k0 + i) % walk.size()];
        if (path.size() > 1 && path[path.size() - 2] == v) {
            path.pop_back();
            img.pop_back();
        } else {
            img.push_back(b.add_child(img.back(), label[v] + shift));
            path.push_back(v);
        }
    }
    return std::move(b).build();
}

LabelledTree sample_rho_hat(Label l, RandomState& rng, std::uint64_t* attempts, std::int64_t max_vertices) {
    require(l >= 1, "sample_rho_hat: root label must be >= 1");
    std::uint64_t tries = 0;
    auto offspring = [&] {
        int k = 0;
        while (rng.uniform() < 0.5) ++k;
        return k;
    };
    for (;;) {
        ++tries;
        TreeBuilder b(l);
        std::vector<std::pair<int, int>> stack{{0, offspring()}};
        bool ok = true;
        while (!stack.empty() && ok) {
            auto& [v, left] = stack.back();
            if (left == 0) {
                stack.pop_back();
                continue;
            }
            --left;
            Label c = b.label(v) + rng.increment();
            if (c < 1) {
                ok = false;
                break;
            }
            int u = b.add_child(v, c);
            if (static_cast<std::int64_t>(b.size()) > max_vertices)
                throw BudgetExceeded("sample_rho_hat: more than " + std::to_string(max_vertices) + " vertices");
            stack.push_back({u, offspring()});
        }
        if (ok) {
            if (attempts) *attempts = tries;
            return std::move(b).build();
        }
    }
}

LabelledTree sample_rho_hat_ball(Label l, int depth, RandomState& rng) {
    require(l >= 1, "sample_rho_hat_ball: root label must be >= 1");
    require(depth >= 0, "sample_rho_hat_ball: depth must be >= 0");
    Forest f;
    f.add(l, 0);
    free_subtree(f, 0, depth, rng);
    return f.to_tree();
}

// Closed form of the d recursion: d_l = 3 w_l (5l^4 + 30l^3 + 59l^2 + 42l + 4) / 560.
long double SpineKernel::d(Label l) {
    if (l <= 0) return 0;
    long double x = static_cast<long double>(l);
    long double poly = (((5 * x + 30) * x + 59) * x + 42) * x + 4;
    return 3 * w_float(l) * poly / 560;
}

long double SpineKernel::down(Label l) {
    long double w = w_float(l);
    return w * w / 12 * d(l - 1) / d(l);
}

long double SpineKernel::up(Label l) {
    long double w = w_float(l);
    return w * w / 12 * d(l + 1) / d(l);
}

long double SpineKernel::stay(Label l) {
    long double w = w_float(l);
    return w * w / 12;
}

Label SpineKernel::step(Label y, RandomState& rng) {
    long double wt[3] = {down(y), stay(y), up(y)};
    return y + pick(wt, 3, rng) - 1;
}

LabelledTree sample_mu_ball_tree(int S, RandomState& rng) {
    require(S >= 0, "sample_mu_ball_tree: S must be >= 0");
    Forest f;
    int u = f.add(1, 0);
    Label y = 1;
    for (int k = 0; k < S; ++k) {
        Label y2 = SpineKernel::step(y, rng);
        int next = f.add(y2, k + 1);
        free_children(f, u, rng);
        f.attach(u, next);
        free_children(f, u, rng);
        for (int c = f.first[u]; c >= 0; c = f.next[c])
            if (c != next) free_subtree(f, c, S - k - 1, rng);
        u = next;
        y = y2;
    }
    return f.to_tree();
}

namespace {

// Exact conditioning on which parts of a mu tree reach a label <= a = R+1.
// A subtree "hits" when one of its non-root vertices has label <= a.
struct HitModel {
    Label a;

    long double wbar(Label l) const { return l > a ? w_float(l - a) : 0; }        // mass with all labels > a
    long double whit(Label l) const { return l > a ? w_gap_float(l, a) : w_float(l); }
    long double nohit(Label l) const {  // P(no hit) for a subtree rooted at label l
        long double w = w_float(l);
        if (l > a) return w_float(l - a) / w;
        if (l == a) return 9 / (8 * w);
        return 1 / w;
    }
    long double hit(Label l) const {
        long double w = w_float(l);
        if (l > a) return w_gap_float(l, a) / w;
        if (l == a) return 1 - 9 / (8 * w);
        return 1 - 1 / w;
    }
    // P(no label <= a strictly after spine vertex k, subtrees of k included) given Y_k = y
    long double gtilde(Label y) const {
        if (y > a) return SpineKernel::d(y - a) / SpineKernel::d(y);
        if (y == a) return 27 / (256 * SpineKernel::d(a));
        return 0;
    }

    // Per-label sampling tables, filled lazily.
    struct SpineRow {
        double pL, pR_L, pR_notL, pS;  // hit flags given some hit ahead
        double c0, c1;                 // cumulative next-label law given hS
        double pH;                     // P(hit ahead) on arriving at this label
    };
    struct ListRow {
        double free_cum[7], need_cum[7];  // stop, no-hit l-1..l+1, hit l-1..l+1
    };
    std::vector<SpineRow> srows;
    std::vector<ListRow> lrows;

    void grow(Label l) {
        std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(l) + 1, 2 * srows.size());
        for (Label y = static_cast<Label>(srows.size()); y < static_cast<Label>(n); ++y) {
            SpineRow s{};
            ListRow r{};
            if (y >= 1) {
                long double A = nohit(y), g = gtilde(y), B = g / (A * A);
                s.pL = static_cast<double>((1 - A) / (1 - g));
                s.pR_L = static_cast<double>(1 - A);
                s.pR_notL = static_cast<double>((1 - A) / (1 - A * B));
                s.pS = static_cast<double>(1 - B);
                long double wt[3];
                for (int j = 0; j < 3; ++j) {
                    Label c = y + j - 1;
                    long double base = j == 0 ? SpineKernel::down(y) : j == 1 ? SpineKernel::stay(y) : SpineKernel::up(y);
                    wt[j] = c < 1 ? 0 : base * (c <= a ? 1 : 1 - gtilde(c));
                }
                long double tot = wt[0] + wt[1] + wt[2];
                s.c0 = static_cast<double>(wt[0] / tot);
                s.c1 = static_cast<double>((wt[0] + wt[1]) / tot);
                s.pH = y > a ? 1.0 : static_cast<double>(1 - g);

                long double h = hit(y), fw[7], nw[7];
                fw[0] = 1 / w_float(y);
                nw[0] = 0;
                for (int j = 0; j < 3; ++j) {
                    Label c = y + j - 1;
                    long double nb = c >= 1 ? wbar(c) / 12 : 0, hb = c >= 1 ? whit(c) / 12 : 0;
                    fw[1 + j] = nb;
                    nw[1 + j] = nb * h;
                    fw[4 + j] = nw[4 + j] = hb;
                }
                long double ft = 0, nt = 0, fa = 0, na = 0;
                for (int i = 0; i < 7; ++i) ft += fw[i], nt += nw[i];
                for (int i = 0; i < 7; ++i) {
                    fa += fw[i];
                    na += nw[i];
                    r.free_cum[i] = static_cast<double>(fa / ft);
                    r.need_cum[i] = static_cast<double>(na / nt);
                }
                r.free_cum[6] = r.need_cum[6] = 2;  // guard against rounding
            }
            srows.push_back(s);
            lrows.push_back(r);
        }
    }
    const SpineRow& spine_row(Label y) {
        if (y >= static_cast<Label>(srows.size())) grow(y);
        return srows[static_cast<std::size_t>(y)];
    }
    const ListRow& list_row(Label l) {
        if (l >= static_cast<Label>(lrows.size())) grow(l);
        return lrows[static_cast<std::size_t>(l)];
    }
};

struct WindowBuilder {
    HitModel& hm;
    RandomState& rng;
    const WindowOptions& opt;
    Forest f;

    enum Mode { NoHit, NeedHit, Free };

    void check_size() {
        if (static_cast<std::int64_t>(f.label.size()) > opt.max_vertices)
            throw BudgetExceeded("sample_mu_window: more than " + std::to_string(opt.max_vertices) + " vertices");
    }

    // Children of v in the given mode; hit children are pushed to `todo`.
    void list(int v, Mode mode, std::vector<std::pair<int, Mode>>& todo) {
        const Label l = f.label[v], a = hm.a;
        if (mode == NoHit) {
            if (l != a) return;
            while (rng.uniform() < 1.0 / 9) f.add_child(v, a + 1);
            return;
        }
        const HitModel::ListRow& row = hm.list_row(l);
        for (;;) {
            const double* cum = mode == Free ? row.free_cum : row.need_cum;
            double u = rng.uniform();
            int i = 0;
            while (cum[i] <= u) ++i;
            if (i == 0) return;
            if (i <= 3) {
                if (l == a) f.add_child(v, l + i - 2);
            } else {
                Label c = l + i - 5;
                int u = f.add_child(v, c);
                todo.push_back({u, c <= a ? Free : NeedHit});
                mode = Free;
            }
            check_size();
        }
    }

    void subtree(int v, Mode mode) {
        std::vector<std::pair<int, Mode>> todo;
        list(v, mode, todo);
        while (!todo.empty()) {
            auto [u, m] = todo.back();
            todo.pop_back();
            list(u, m, todo);
        }
    }
};

}  // namespace

long double window_no_hit(Label y, int R) {
    require(y >= 1 && R >= 0, "window_no_hit: need y >= 1 and R >= 0");
    return HitModel{R + 1, {}, {}}.gtilde(y);
}

long double subtree_no_hit(Label l, int R) {
    require(l >= 1 && R >= 0, "subtree_no_hit: need l >= 1 and R >= 0");
    return HitModel{R + 1, {}, {}}.nohit(l);
}

TruncatedSpineTree sample_mu_window(int R, double eps, RandomState& rng, const WindowOptions& opt) {
    require(R >= 0, "sample_mu_window: R must be >= 0");
    require(eps > 0 && eps < 1, "sample_mu_window: eps must lie in (0,1)");
    HitModel hm{R + 1, {}, {}};
    const Label a = hm.a;
    WindowBuilder wb{hm, rng, opt, {}};
    Forest& f = wb.f;

    TruncatedSpineTree out;
    out.R = R;
    out.eps_actual = 0;

    Label y = 1;
    bool H = rng.uniform() < hm.spine_row(1).pH;
    int prev = -1;  // last spine vertex kept in the window
    int slot = -1;  // its spine child, labelled once known
    std::int64_t k = 0;
    for (;; ++k) {
        if (k > opt.max_steps)
            throw BudgetExceeded("sample_mu_window: spine longer than " + std::to_string(opt.max_steps) + " steps");
        bool hL = false, hR = false, hS = false;
        const HitModel::SpineRow& row = hm.spine_row(y);
        if (H) {
            if (rng.uniform() < row.pL) {
                hL = true;
                hR = rng.uniform() < row.pR_L;
                hS = rng.uniform() < row.pS;
            } else {
                hR = rng.uniform() < row.pR_notL;
                hS = hR ? rng.uniform() < row.pS : true;
            }
        }
        const bool pass_through = y > a && !hL && !hR && hS;
        if (!pass_through) {
            int u;
            if (prev < 0) {
                u = f.add(y, 0);
            } else {
                // monotone label path replaces any skipped pass-through vertices
                Label l = f.label[prev];
                bool skipped = f.gen[prev] + 1 != k;
                u = slot;
                while (skipped && std::abs(y - l) > 1) {
                    l += y > l ? 1 : -1;
                    f.label[u] = l;
                    f.gen[u] = -1;
                    int c = f.add(0, -1);
                    f.attach(u, c);
                    u = c;
                }
                f.label[u] = y;
                f.gen[u] = static_cast<int>(k);
            }
            out.spine.push_back(y);
            out.spine_generation.push_back(k);
            wb.subtree(u, hL ? WindowBuilder::NeedHit : WindowBuilder::NoHit);
            slot = f.add(0, static_cast<int>(k) + 1);
            f.attach(u, slot);
            wb.subtree(u, hR ? WindowBuilder::NeedHit : WindowBuilder::NoHit);
            prev = u;
        }
        if (!hS) {
            if (!pass_through) {
                if (y == a) f.label[slot] = a + 1;
                else f.alive[slot] = 0;
            }
            break;
        }
        // next spine label, conditioned on a later hit
        double u = rng.uniform();
        Label y2 = u < row.c0 ? y - 1 : u < row.c1 ? y : y + 1;
        H = rng.uniform() < hm.spine_row(y2).pH;
        y = y2;
        wb.check_size();
    }
    out.spine_steps = k;
    out.skeleton = f.to_tree(&out.generation);
    int S = 0;
    for (std::size_t v = 0; v < out.generation.size(); ++v)
        if (out.skeleton.label(static_cast<int>(v)) <= a) S = std::max(S, out.generation[v]);
    out.S = S;
    return out;
}

nlohmann::json window_to_json(const TruncatedSpineTree& w) {
    return {{"R", w.R},
            {"S", w.S},
            {"eps_actual", w.eps_actual},
            {"spine_steps", w.spine_steps},
            {"spine", w.spine},
            {"spine_generation", w.spine_generation},
            {"tree", serialize_tree(w.skeleton)}};
}

BallMap window_quad_ball(const TruncatedSpineTree& w) {
    return ball(phi(prune_for_ball(w.skeleton, w.R)), w.R);
}

RotationMap sample_uniform_quadrangulation(int n, RandomState& rng) {
    return phi(uniform_well_labelled(n, rng));
}

}  // namespace uiq
