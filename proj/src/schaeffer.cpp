#include "uiq/schaeffer.hpp"

#include <algorithm>

#include "uiq/error.hpp"

namespace uiq {

// ---- successor ---------------------------------------------------------------

long long successor(const CornerSequence& seq, long long index) {
    const auto& cs = seq.corners;
    auto at = std::lower_bound(cs.begin(), cs.end(), index,
                               [](const CornerSequence::Corner& c, long long i) { return c.index < i; });
    if (at == cs.end() || at->index != index) throw DomainError("successor: corner " + std::to_string(index) + " not listed");
    const Label target = at->label - 1;
    if (at->label <= 1) throw DomainError("successor: label must be >= 2");
    if (seq.infinite && target > seq.certified_label)
        throw DomainError("successor: undetermined within window (label " + std::to_string(target) +
                          " above certified " + std::to_string(seq.certified_label) + ")");
    for (auto it = at + 1; it != cs.end(); ++it)
        if (it->label == target) {
            if (seq.infinite && index < 0 && it->index > 0) break;  // cannot happen in a consistent window
            return it->index;
        }
    if (!seq.infinite || index < 0) throw DomainError("successor: no later corner with label " + std::to_string(target));
    for (const auto& c : cs) {
        if (c.index > 0) break;
        if (c.label == target) return c.index;
    }
    throw DomainError("successor: no corner with label " + std::to_string(target) + " on the left side");
}

nlohmann::json corners_to_json(const CornerSequence& seq) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : seq.corners) {
        nlohmann::json j{{"index", c.index}, {"vertex", c.vertex}, {"label", c.label}};
        if (seq.infinite) j["side"] = c.index < 0 ? "left" : c.index > 0 ? "right" : "root";
        arr.push_back(std::move(j));
    }
    nlohmann::json out{{"infinite", seq.infinite}, {"corners", std::move(arr)}};
    if (seq.infinite) out["certified_label"] = seq.certified_label;
    return out;
}

bool chords_planar(const ChordSet& chords) {
    std::vector<std::pair<long long, long long>> iv;
    iv.reserve(chords.chords.size());
    for (auto [a, b] : chords.chords) iv.emplace_back(std::min(a, b), std::max(a, b));
    std::sort(iv.begin(), iv.end(), [](auto& x, auto& y) { return x.first != y.first ? x.first < y.first : x.second > y.second; });
    std::vector<long long> open;  // right ends of enclosing chords
    for (auto [l, r] : iv) {
        while (!open.empty() && open.back() <= l) open.pop_back();
        if (!open.empty() && open.back() < r) return false;
        open.push_back(r);
    }
    return true;
}

nlohmann::json chords_to_json(const ChordSet& chords) {
    nlohmann::json arr = nlohmann::json::array();
    for (auto [a, b] : chords.chords) arr.push_back({a, b});
    return arr;
}

// ---- direct construction -------------------------------------------------------

namespace {

void require_phi_input(const LabelledTree& t) {
    if (t.num_edges() == 0) throw DomainError("phi: tree must have at least one edge");
    if (t.label(0) != 1) throw DomainError("phi: root label must be 1");
    if (!t.is_well_labelled()) throw DomainError("phi: tree is not well-labelled");
}

// s[i] = next corner cyclically with label one less, or -1 for label-1 corners.
std::vector<int> contour_successor(const std::vector<Label>& lab) {
    const int m = static_cast<int>(lab.size());
    Label top = *std::max_element(lab.begin(), lab.end());
    std::vector<int> last(static_cast<std::size_t>(top) + 1, -1), s(m, -1);
    for (int k = 2 * m - 1; k >= 0; --k) {
        int i = k % m;
        if (k < m && lab[i] >= 2) s[i] = last[lab[i] - 1];
        last[lab[i]] = i;
    }
    return s;
}

}  // namespace

RotationMap phi(const LabelledTree& t) {
    require_phi_input(t);
    const auto cv = contour_vertices(t);
    const int m = static_cast<int>(cv.size());  // 2n corners, 2n arcs
    std::vector<Label> lab(m);
    for (int i = 0; i < m; ++i) lab[i] = t.label(cv[i]);
    const auto s = contour_successor(lab);

    // incoming arcs per corner, ordered by distance back along the contour
    std::vector<int> start(m + 1, 0);
    for (int i = 0; i < m; ++i)
        if (s[i] >= 0) ++start[s[i] + 1];
    for (int k = 0; k < m; ++k) start[k + 1] += start[k];
    std::vector<int> incoming(start[m]), fill(start.begin(), start.end() - 1);
    for (int i = 0; i < m; ++i)
        if (s[i] >= 0) incoming[fill[s[i]]++] = i;
    for (int k = 0; k < m; ++k) {
        auto b = incoming.begin() + start[k], e = incoming.begin() + start[k + 1];
        std::sort(b, e, [&](int x, int y) { return (x - k + m) % m < (y - k + m) % m; });
    }

    std::vector<int> twin(2 * m), next(2 * m, -1);
    for (int i = 0; i < m; ++i) {
        twin[2 * i] = 2 * i + 1;
        twin[2 * i + 1] = 2 * i;
    }
    // corners of each vertex, in contour order
    const int nv = static_cast<int>(t.num_vertices());
    std::vector<std::vector<int>> corners(nv);
    for (int i = 0; i < m; ++i) corners[cv[i]].push_back(i);
    std::vector<int> ring;
    for (int v = 0; v < nv; ++v) {
        ring.clear();
        for (auto it = corners[v].rbegin(); it != corners[v].rend(); ++it) {
            int k = *it;
            ring.push_back(2 * k);
            for (int j = start[k]; j < start[k + 1]; ++j) ring.push_back(2 * incoming[j] + 1);
        }
        for (std::size_t j = 0; j < ring.size(); ++j) next[ring[j]] = ring[(j + 1) % ring.size()];
    }
    ring.clear();
    for (int k = 0; k < m; ++k)
        if (s[k] < 0) ring.push_back(2 * k + 1);
    for (std::size_t j = 0; j < ring.size(); ++j) next[ring[j]] = ring[(j + 1) % ring.size()];
    return RotationMap(std::move(twin), std::move(next), 1);
}

std::vector<int> phi_vertex_darts(const LabelledTree& t) {
    const auto cv = contour_vertices(t);
    std::vector<int> out(t.num_vertices() + 1, -1);
    for (int i = static_cast<int>(cv.size()) - 1; i >= 0; --i) out[cv[i]] = 2 * i;
    out.back() = 1;
    return out;
}

// ---- literal Steps 1-3 -------------------------------------------------------

std::vector<CornerSequence> step1_faces(const LabelledTree& t) {
    require_phi_input(t);
    const auto cv = contour_vertices(t);
    const int m = static_cast<int>(cv.size());
    std::vector<int> ones;
    for (int i = 0; i < m; ++i)
        if (t.label(cv[i]) == 1) ones.push_back(i);
    const int v0 = static_cast<int>(t.num_vertices());
    std::vector<CornerSequence> faces;
    for (std::size_t f = 0; f < ones.size(); ++f) {
        int a = ones[f], b = ones[(f + 1) % ones.size()];
        if (b <= a) b += m;
        CornerSequence seq;
        seq.corners.push_back({0, v0, 0});
        for (int i = a; i <= b; ++i) {
            int c = i % m;
            seq.corners.push_back({static_cast<long long>(i - a + 1), cv[c], t.label(cv[c])});
        }
        faces.push_back(std::move(seq));
    }
    return faces;
}

LiteralPhi phi_literal(const LabelledTree& t) {
    require_phi_input(t);
    LiteralPhi out;
    const auto cv = contour_vertices(t);
    const int m = static_cast<int>(cv.size());
    const int nv = static_cast<int>(t.num_vertices());
    std::vector<Label> lab(m);
    for (int i = 0; i < m; ++i) lab[i] = t.label(cv[i]);

    // Step 2 successor, computed face by face
    std::vector<int> s(m, -1);
    const auto faces = step1_faces(t);
    std::vector<int> ones;
    for (int i = 0; i < m; ++i)
        if (lab[i] == 1) ones.push_back(i);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& cs = faces[f].corners;
        const int k = static_cast<int>(cs.size());
        const int a = ones[f];
        std::vector<long long> last(static_cast<std::size_t>(nv) + 2, -1);
        std::vector<long long> succ(k, -1);
        for (int j = k - 1; j >= 1; --j) {
            if (cs[j].label >= 2) succ[j] = last[cs[j].label - 1];
            last[cs[j].label] = j;
        }
        ChordSet chords;
        for (int j = 1; j < k - 1; ++j) {  // the last corner belongs to the next face
            int c = (a + j - 1) % m;
            if (cs[j].label < 2) continue;
            if (succ[j] < 0) throw Error("phi_literal: successor missing inside a face");
            s[c] = (a + static_cast<int>(succ[j]) - 1) % m;
            if (succ[j] != j + 1) chords.chords.emplace_back(j, succ[j]);
        }
        if (!chords_planar(chords)) out.chords_planar = false;
    }

    // darts: tree edge forward from corner i -> 4i, its twin is the forward dart of the return corner
    //        arc out of corner i (label 1 or chord) -> 4i+2 at the corner, 4i+3 at the target
    std::vector<int> back(m, -1);
    {
        std::vector<int> first(nv, -1);
        for (int i = 0; i < m; ++i) {
            int a = cv[i], b = cv[(i + 1) % m];
            int child = t.parent(b) == a ? b : a;
            if (first[child] < 0) {
                first[child] = i;
            } else {
                back[i] = first[child];
                back[first[child]] = i;
            }
        }
    }
    auto has_arc = [&](int i) { return lab[i] == 1 || s[i] != (i + 1) % m; };
    std::vector<int> id(4 * m, -1);
    int D = 0;
    for (int i = 0; i < m; ++i) {
        id[4 * i] = D++;
        if (has_arc(i)) {
            id[4 * i + 2] = D++;
            id[4 * i + 3] = D++;
        }
    }
    std::vector<int> twin(D), next(D, -1);
    for (int i = 0; i < m; ++i) {
        twin[id[4 * i]] = id[4 * back[i]];
        if (has_arc(i)) {
            twin[id[4 * i + 2]] = id[4 * i + 3];
            twin[id[4 * i + 3]] = id[4 * i + 2];
        }
    }
    std::vector<std::vector<int>> incoming(m);
    for (int i = 0; i < m; ++i)
        if (lab[i] >= 2 && has_arc(i)) incoming[s[i]].push_back(i);
    for (int k = 0; k < m; ++k)
        std::sort(incoming[k].begin(), incoming[k].end(),
                  [&](int x, int y) { return (x - k + m) % m < (y - k + m) % m; });
    std::vector<std::vector<int>> corners(nv);
    for (int i = 0; i < m; ++i) corners[cv[i]].push_back(i);
    std::vector<int> ring;
    auto close_ring = [&] {
        for (std::size_t j = 0; j < ring.size(); ++j) next[ring[j]] = ring[(j + 1) % ring.size()];
    };
    for (int v = 0; v < nv; ++v) {
        ring.clear();
        for (auto it = corners[v].rbegin(); it != corners[v].rend(); ++it) {
            int k = *it;
            ring.push_back(id[4 * k]);
            if (has_arc(k)) ring.push_back(id[4 * k + 2]);
            for (int j : incoming[k]) ring.push_back(id[4 * j + 3]);
        }
        close_ring();
    }
    ring.clear();
    for (int k = 0; k < m; ++k)
        if (lab[k] == 1) ring.push_back(id[4 * k + 3]);
    close_ring();
    const int root = id[3];
    out.intermediate = RotationMap(twin, next, root);

    // labels per vertex of the intermediate map
    const auto& M = out.intermediate;
    out.intermediate_label.assign(M.num_vertices(), 0);
    for (int i = 0; i < m; ++i) out.intermediate_label[M.vertex(id[4 * i])] = lab[i];
    out.intermediate_label[M.vertex(root)] = 0;

    for (int f = 0; f < M.num_faces(); ++f) {
        std::vector<Label> ls;
        int d = M.face_dart(f);
        do {
            ls.push_back(out.intermediate_label[M.vertex(d)]);
            d = M.face_next(d);
        } while (d != M.face_dart(f));
        bool ok = false;
        const int k = static_cast<int>(ls.size());
        const int lo = static_cast<int>(std::min_element(ls.begin(), ls.end()) - ls.begin());
        const Label l = ls[lo];
        if (k == 3) {
            ok = ls[(lo + 1) % 3] == l + 1 && ls[(lo + 2) % 3] == l + 1;
        } else if (k == 4) {
            ok = ls[(lo + 1) % 4] == l + 1 && ls[(lo + 2) % 4] == l + 2 && ls[(lo + 3) % 4] == l + 1;
        }
        if (ok) {
            (k == 3 ? out.triangles : out.quadrangles)++;
        } else {
            std::string desc = "(";
            for (int j = 0; j < k; ++j) desc += (j ? "," : "") + std::to_string(ls[j]);
            out.bad_faces.push_back(desc + ")");
        }
    }

    // Step 3: drop tree edges whose ends carry the same label
    std::vector<char> drop(D, 0);
    for (int i = 0; i < m; ++i)
        if (lab[i] == lab[(i + 1) % m]) drop[id[4 * i]] = 1;
    std::vector<int> keep_id(D, -1);
    int K = 0;
    for (int d = 0; d < D; ++d)
        if (!drop[d]) keep_id[d] = K++;
    std::vector<int> twin3(K), next3(K);
    for (int d = 0; d < D; ++d) {
        if (drop[d]) continue;
        twin3[keep_id[d]] = keep_id[twin[d]];
        int e = next[d];
        while (drop[e]) e = next[e];
        next3[keep_id[d]] = keep_id[e];
    }
    out.result = RotationMap(std::move(twin3), std::move(next3), keep_id[root]);
    return out;
}

// ---- inverse -------------------------------------------------------------------

LabelledTree phi_inverse(const RotationMap& q) {
    auto diag = validate_quadrangulation(q);
    if (!diag.valid) throw DomainError("phi_inverse: not a quadrangulation: " + diag.problems.front());
    const auto dist = bfs_distances(q);
    const int D = q.num_darts();
    // items: 2d is the corner just before dart d (ccw) at its origin, 2d+1 is dart d itself
    std::vector<int> partner(2 * D, -1);
    for (int f = 0; f < q.num_faces(); ++f) {
        int e[4];
        e[0] = q.face_dart(f);
        for (int j = 1; j < 4; ++j) e[j] = q.face_next(e[j - 1]);
        int L[4];
        for (int j = 0; j < 4; ++j) L[j] = dist[q.vertex(e[j])];
        if (L[0] == L[2] && L[1] == L[3]) {
            int j = L[0] > L[1] ? 0 : 1;
            partner[2 * e[j]] = 2 * e[j + 2];
            partner[2 * e[j + 2]] = 2 * e[j];
        } else {
            int j = static_cast<int>(std::max_element(L, L + 4) - L);
            int d = e[j];  // leaves the far corner along the face
            partner[2 * d + 1] = 2 * q.twin(d) + 1;
            partner[2 * q.twin(d) + 1] = 2 * d + 1;
        }
    }
    // ccw item ring of every vertex
    std::vector<int> pos(2 * D, -1), ring_start(q.num_vertices() + 1, 0);
    std::vector<int> items;
    items.reserve(2 * D);
    for (int v = 0; v < q.num_vertices(); ++v) {
        ring_start[v] = static_cast<int>(items.size());
        int d0 = q.vertex_dart(v), d = d0;
        do {
            pos[2 * d] = static_cast<int>(items.size());
            items.push_back(2 * d);
            pos[2 * d + 1] = static_cast<int>(items.size());
            items.push_back(2 * d + 1);
            d = q.next(d);
        } while (d != d0);
    }
    ring_start[q.num_vertices()] = static_cast<int>(items.size());
    auto vertex_of_item = [&](int item) { return q.vertex(item >> 1); };

    const int root_vertex = q.vertex(q.twin(q.root()));
    std::vector<char> seen(q.num_vertices(), 0);
    struct Frame {
        int entry_item;  // item through which the vertex is reached
        int builder_parent;
        bool is_root;
    };
    TreeBuilder builder(dist[root_vertex]);
    std::vector<Frame> stack{{2 * q.twin(q.root()) + 1, -1, true}};
    std::vector<int> kids;
    int added = 0;
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        const int v = vertex_of_item(fr.entry_item);
        if (seen[v]) throw Error("phi_inverse: selected edges do not form a tree");
        seen[v] = 1;
        int me = fr.is_root ? 0 : builder.add_child(fr.builder_parent, dist[v]);
        ++added;
        const int lo = ring_start[v], len = ring_start[v + 1] - lo;
        const int p = pos[fr.entry_item] - lo;
        kids.clear();
        for (int step = 1; step < len; ++step) {  // clockwise from the entry
            int item = items[lo + ((p - step) % len + len) % len];
            if (partner[item] >= 0) kids.push_back(partner[item]);
        }
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, me, false});
    }
    if (added != q.num_vertices() - 1) throw Error("phi_inverse: selected edges do not span");
    return std::move(builder).build();
}

// ---- windows --------------------------------------------------------------------

BallMap window_ball(const LabelledTree& t, int S, int R) {
    if (S < 0 || R < 0) throw DomainError("window_ball: S and R must be >= 0");
    if (in_omega(t, S, R))
        throw DomainError("window_ball: label <= R+1 above generation " + std::to_string(S));
    if (R == 0) return BallMap{0, {}, {}, {}, {}};
    return ball(phi(ball_tree(t, S)), R);
}

LabelledTree prune_for_ball(const LabelledTree& t, int R) {
    if (R < 0) throw DomainError("prune_for_ball: R must be >= 0");
    const Label a = static_cast<Label>(R) + 1;
    const int n = static_cast<int>(t.num_vertices());
    // low[v]: some vertex of the subtree of v has label <= a
    std::vector<char> low(n, 0);
    for (int v = n - 1; v >= 0; --v) {
        if (t.label(v) <= a) low[v] = 1;
        if (low[v] && v > 0) low[t.parent(v)] = 1;
    }
    std::vector<char> keep(n, 0);
    keep[0] = 1;
    std::vector<int> kept_children(n, 0);
    for (int v = 1; v < n; ++v) {
        int p = t.parent(v);
        if (!keep[p]) continue;
        if (low[v] || (t.label(p) == a && low[p] && t.label(v) > a)) {
            // a high child of an a-vertex is kept as a leaf
            keep[v] = low[v] ? 1 : 2;
            ++kept_children[p];
        }
    }
    for (int v = 1; v < n; ++v)
        if (keep[v] && keep[t.parent(v)] == 2) keep[v] = 0;
    // recount after the stub cut
    std::fill(kept_children.begin(), kept_children.end(), 0);
    for (int v = 1; v < n; ++v)
        if (keep[v]) ++kept_children[t.parent(v)];
    auto pass_through = [&](int v) { return v > 0 && keep[v] == 1 && t.label(v) > a && kept_children[v] == 1; };

    TreeBuilder b(t.label(0));
    std::vector<int> image(n, -1);
    image[0] = 0;
    for (int v = 1; v < n; ++v) {
        if (!keep[v] || pass_through(v)) continue;
        int p = t.parent(v);
        while (pass_through(p)) p = t.parent(p);
        int at = image[p];
        Label from = t.label(p), to = t.label(v);
        Label step = to > from ? 1 : -1;
        if (to != from)
            for (Label l = from + step; l != to; l += step) at = b.add_child(at, l);
        image[v] = b.add_child(at, to);
    }
    return std::move(b).build();
}

}  // namespace uiq
