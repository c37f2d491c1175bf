#include "uiq/tree.hpp"

#include <algorithm>
#include <cctype>

#include "uiq/error.hpp"

namespace uiq {

LabelledTree::LabelledTree(Label root_label)
    : parent_{-1}, size_{1}, nchild_{0}, depth_{0}, label_{root_label} {}

LabelledTree LabelledTree::from_preorder(std::vector<std::int32_t> parent, std::vector<Label> label) {
    const std::size_t n = parent.size();
    if (n == 0 || label.size() != n) throw DomainError("tree: empty or mismatched arrays");
    if (parent[0] != -1) throw DomainError("tree: root must have parent -1");
    LabelledTree t;
    t.parent_ = std::move(parent);
    t.label_ = std::move(label);
    t.size_.assign(n, 1);
    t.nchild_.assign(n, 0);
    t.depth_.assign(n, 0);
    // rightmost branch as a stack
    std::vector<std::int32_t> stack{0};
    for (std::size_t v = 1; v < n; ++v) {
        const std::int32_t p = t.parent_[v];
        while (!stack.empty() && stack.back() != p) stack.pop_back();
        if (stack.empty()) throw DomainError("tree: parent array is not a preorder");
        Label diff = t.label_[v] - t.label_[p];
        if (diff < -1 || diff > 1) throw DomainError("tree: adjacent labels differ by more than one");
        t.nchild_[p]++;
        t.depth_[v] = t.depth_[p] + 1;
        t.height_ = std::max(t.height_, t.depth_[v]);
        stack.push_back(static_cast<std::int32_t>(v));
    }
    for (std::size_t v = n; v-- > 1;) t.size_[t.parent_[v]] += t.size_[v];
    return t;
}

int LabelledTree::next_sibling(int v) const {
    if (v == 0) return -1;
    int s = v + size_[v];
    if (s < static_cast<int>(label_.size()) && parent_[s] == parent_[v]) return s;
    return -1;
}

std::vector<int> LabelledTree::children(int v) const {
    std::vector<int> out;
    for (int c = first_child(v); c != -1; c = next_sibling(c)) out.push_back(c);
    return out;
}

std::vector<int> LabelledTree::address(int v) const {
    std::vector<int> a;
    while (v != 0) {
        int p = parent_[v], k = 1;
        for (int c = first_child(p); c != v; c = next_sibling(c)) ++k;
        a.push_back(k);
        v = p;
    }
    std::reverse(a.begin(), a.end());
    return a;
}

Label LabelledTree::min_label() const { return *std::min_element(label_.begin(), label_.end()); }

bool LabelledTree::is_well_labelled() const { return min_label() >= 1; }

int TreeBuilder::add_child(int parent, Label label) {
    parent_.push_back(parent);
    label_.push_back(label);
    return static_cast<int>(label_.size()) - 1;
}

LabelledTree TreeBuilder::build() && {
    return LabelledTree::from_preorder(std::move(parent_), std::move(label_));
}

// ---- text format -----------------------------------------------------------

LabelledTree parse_tree(const std::string& text) {
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto fail = [&](const std::string& why) -> ParseError {
        return ParseError("parse_tree at offset " + std::to_string(i) + ": " + why);
    };
    auto number = [&]() -> Label {
        skip();
        std::size_t start = i;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i || (i == start + 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
            throw fail("expected integer label");
        try {
            return std::stoll(text.substr(start, i - start));
        } catch (const std::out_of_range&) {
            throw fail("label out of range");
        }
    };
    skip();
    if (i >= text.size()) throw fail("empty input");
    std::vector<std::int32_t> parent;
    std::vector<Label> label;
    std::vector<std::int32_t> open;
    do {
        skip();
        if (i >= text.size()) throw fail("unbalanced parentheses");
        if (text[i] == '(') {
            ++i;
            Label l = number();
            std::int32_t p = open.empty() ? -1 : open.back();
            if (p >= 0 && (l - label[p] > 1 || label[p] - l > 1)) throw fail("label increment violation");
            if (p < 0 && !parent.empty()) throw fail("more than one root");
            parent.push_back(p);
            label.push_back(l);
            open.push_back(static_cast<std::int32_t>(label.size()) - 1);
        } else if (text[i] == ')') {
            if (open.empty()) throw fail("unbalanced parentheses");
            ++i;
            open.pop_back();
        } else {
            throw fail(std::string("unexpected character '") + text[i] + "'");
        }
    } while (!open.empty());
    skip();
    if (i != text.size()) throw fail("trailing input");
    return LabelledTree::from_preorder(std::move(parent), std::move(label));
}

std::string serialize_tree(const LabelledTree& t) {
    std::string out;
    std::vector<int> stack;  // open vertices
    const int n = static_cast<int>(t.num_vertices());
    for (int v = 0; v < n; ++v) {
        while (!stack.empty() && stack.back() != t.parent(v)) {
            out += ')';
            stack.pop_back();
        }
        out += '(';
        out += std::to_string(t.label(v));
        stack.push_back(v);
    }
    out.append(stack.size(), ')');
    return out;
}

nlohmann::json tree_to_json(const LabelledTree& t) {
    const int n = static_cast<int>(t.num_vertices());
    std::vector<nlohmann::json> node(n);
    for (int v = 0; v < n; ++v) node[v] = {{"label", t.label(v)}, {"children", nlohmann::json::array()}};
    for (int v = n - 1; v >= 1; --v) {
        auto& kids = node[t.parent(v)]["children"];
        kids.insert(kids.begin(), std::move(node[v]));
    }
    return std::move(node[0]);
}

LabelledTree tree_from_json(const nlohmann::json& j) {
    std::vector<std::int32_t> parent;
    std::vector<Label> label;
    struct Frame {
        const nlohmann::json* node;
        std::int32_t parent;
    };
    std::vector<Frame> stack{{&j, -1}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        const auto& node = *f.node;
        if (!node.is_object() || !node.contains("label") || !node["label"].is_number_integer())
            throw ParseError("tree json: node needs an integer \"label\"");
        parent.push_back(f.parent);
        label.push_back(node["label"].get<Label>());
        auto self = static_cast<std::int32_t>(label.size()) - 1;
        if (node.contains("children")) {
            const auto& kids = node["children"];
            if (!kids.is_array()) throw ParseError("tree json: \"children\" must be an array");
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({&*it, self});
        }
    }
    try {
        return LabelledTree::from_preorder(std::move(parent), std::move(label));
    } catch (const DomainError& e) {
        throw ParseError(std::string("tree json: ") + e.what());
    }
}

// ---- contour ---------------------------------------------------------------

ContourPair contour_pair(const LabelledTree& t) {
    ContourPair cp;
    const int n = static_cast<int>(t.num_vertices());
    cp.C.reserve(2 * n - 1);
    cp.V.reserve(2 * n - 1);
    std::vector<int> stack{0};
    cp.C.push_back(0);
    cp.V.push_back(t.label(0));
    for (int v = 1; v < n; ++v) {
        while (stack.back() != t.parent(v)) {
            stack.pop_back();
            cp.C.push_back(t.depth(stack.back()));
            cp.V.push_back(t.label(stack.back()));
        }
        stack.push_back(v);
        cp.C.push_back(t.depth(v));
        cp.V.push_back(t.label(v));
    }
    while (stack.size() > 1) {
        stack.pop_back();
        cp.C.push_back(t.depth(stack.back()));
        cp.V.push_back(t.label(stack.back()));
    }
    return cp;
}

LabelledTree decode_contour(const ContourPair& cp) {
    const auto& C = cp.C;
    const auto& V = cp.V;
    if (C.empty() || C.size() != V.size() || C.size() % 2 == 0 || C.front() != 0 || C.back() != 0)
        throw DomainError("decode_contour: malformed contour pair");
    TreeBuilder b(V[0]);
    std::vector<int> stack{0};
    for (std::size_t i = 1; i < C.size(); ++i) {
        if (C[i] == C[i - 1] + 1) {
            stack.push_back(b.add_child(stack.back(), V[i]));
        } else if (C[i] == C[i - 1] - 1 && stack.size() > 1) {
            stack.pop_back();
            if (b.label(stack.back()) != V[i]) throw DomainError("decode_contour: inconsistent labels");
        } else {
            throw DomainError("decode_contour: steps of C must be +-1 and stay nonnegative");
        }
    }
    return std::move(b).build();
}

std::vector<int> contour_vertices(const LabelledTree& t) {
    const int n = static_cast<int>(t.num_vertices());
    if (n == 1) return {0};
    std::vector<int> out;
    out.reserve(2 * (n - 1));
    std::vector<int> stack{0};
    out.push_back(0);
    for (int v = 1; v < n; ++v) {
        while (stack.back() != t.parent(v)) {
            stack.pop_back();
            out.push_back(stack.back());
        }
        stack.push_back(v);
        out.push_back(v);
    }
    while (stack.size() > 2) {
        stack.pop_back();
        out.push_back(stack.back());
    }
    return out;  // the final return to the root is time 2n, i.e. time 0 again
}

// ---- balls and predicates ------------------------------------------------

LabelledTree ball_tree(const LabelledTree& t, int S) {
    if (S < 0) throw DomainError("ball_tree: S must be >= 0");
    if (S >= t.height()) return t;
    const int n = static_cast<int>(t.num_vertices());
    std::vector<std::int32_t> index(n, -1), parent;
    std::vector<Label> label;
    for (int v = 0; v < n; ++v) {
        if (t.depth(v) > S) continue;
        index[v] = static_cast<std::int32_t>(label.size());
        parent.push_back(v == 0 ? -1 : index[t.parent(v)]);
        label.push_back(t.label(v));
    }
    return LabelledTree::from_preorder(std::move(parent), std::move(label));
}

mpq_class tree_distance(const LabelledTree& a, const LabelledTree& b) {
    if (a == b) return 0;
    const int top = std::max(a.height(), b.height());
    for (int S = 0; S <= top; ++S) {
        if (ball_tree(a, S) != ball_tree(b, S)) {
            // sup of the agreeing radii is S - 1, or 0 when none agree
            return mpq_class(1, S == 0 ? 1 : S);
        }
    }
    return 0;  // unreachable: equal balls at the top height means equal trees
}

bool in_omega(const LabelledTree& t, int S, Label R) {
    const int n = static_cast<int>(t.num_vertices());
    for (int v = 0; v < n; ++v)
        if (t.depth(v) > S && t.label(v) <= R + 1) return true;
    return false;
}

bool in_a_alpha(const LabelledTree& t, int S, const mpq_class& alpha) {
    if (S < 1) throw DomainError("in_a_alpha: S must be >= 1");
    if (alpha < 0 || alpha >= mpq_class(1, 2)) throw DomainError("in_a_alpha: alpha must lie in [0, 1/2)");
    mpq_class a = alpha;
    a.canonicalize();
    const unsigned long p = a.get_num().get_ui(), q = a.get_den().get_ui();
    // label <= S^(p/q)  <=>  label^q <= S^p  for positive labels
    mpz_class rhs;
    mpz_ui_pow_ui(rhs.get_mpz_t(), static_cast<unsigned long>(S), p);
    const int n = static_cast<int>(t.num_vertices());
    for (int v = 0; v < n; ++v) {
        if (t.depth(v) != S) continue;
        Label l = t.label(v);
        if (l <= 0) return true;
        mpz_class lhs;
        mpz_ui_pow_ui(lhs.get_mpz_t(), static_cast<unsigned long>(l), q);
        if (lhs <= rhs) return true;
    }
    return false;
}

GenerationCensus census(const LabelledTree& t) {
    GenerationCensus c;
    const int n = static_cast<int>(t.num_vertices());
    c.generations.resize(t.height() + 1);
    for (int v = 0; v < n; ++v) {
        c.generations[t.depth(v)].push_back(v);
        c.label_counts[t.label(v)]++;
    }
    for (int v : contour_vertices(t)) c.corner_counts[t.label(v)]++;
    return c;
}

// ---- enumeration -----------------------------------------------------------

namespace {

// Dyck words of semilength n as bit vectors (1 = up).
void dyck_words(int n, std::vector<std::vector<char>>& out) {
    std::vector<char> w;
    auto rec = [&](auto&& self, int up, int down) -> void {
        if (up == n && down == n) {
            out.push_back(w);
            return;
        }
        if (up < n) {
            w.push_back(1);
            self(self, up + 1, down);
            w.pop_back();
        }
        if (down < up) {
            w.push_back(0);
            self(self, up, down + 1);
            w.pop_back();
        }
    };
    rec(rec, 0, 0);
}

}  // namespace

std::vector<LabelledTree> enumerate_shapes(int n) {
    if (n < 0) throw DomainError("enumerate_shapes: n must be >= 0");
    std::vector<std::vector<char>> words;
    dyck_words(n, words);
    std::vector<LabelledTree> out;
    for (const auto& w : words) {
        TreeBuilder b(1);
        std::vector<int> stack{0};
        for (char step : w) {
            if (step) stack.push_back(b.add_child(stack.back(), 1));
            else stack.pop_back();
        }
        out.push_back(std::move(b).build());
    }
    return out;
}

std::vector<LabelledTree> enumerate_trees(int n, Label root_label, bool well_labelled) {
    std::vector<LabelledTree> out;
    if (well_labelled && root_label < 1) return out;
    for (const auto& shape : enumerate_shapes(n)) {
        std::vector<int> inc(n, -1);
        const auto& parent = shape.parents();
        for (;;) {
            std::vector<Label> label(n + 1);
            label[0] = root_label;
            bool ok = true;
            for (int v = 1; v <= n && ok; ++v) {
                label[v] = label[parent[v]] + inc[v - 1];
                ok = !well_labelled || label[v] >= 1;
            }
            if (ok) out.push_back(LabelledTree::from_preorder(parent, std::move(label)));
            int k = 0;
            while (k < n && inc[k] == 1) inc[k++] = -1;
            if (k == n) break;
            ++inc[k];
        }
    }
    return out;
}

}  // namespace uiq
