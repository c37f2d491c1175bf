#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace uiq {

using Label = std::int64_t;

// Finite rooted plane tree with integer labels, stored in preorder.
// Vertex 0 is the root; the children of v are the vertices whose parent is v,
// in increasing index order. First child and next sibling are derived from
// subtree sizes, so Ulam-Harris addresses never need to be stored.
class LabelledTree {
public:
    LabelledTree() : LabelledTree(1) {}
    explicit LabelledTree(Label root_label);

    // parent[0] must be -1 and every other parent must lie on the current
    // rightmost branch (i.e. the arrays describe a preorder). Labels of
    // adjacent vertices must differ by at most one.
    static LabelledTree from_preorder(std::vector<std::int32_t> parent, std::vector<Label> label);

    std::size_t num_vertices() const { return label_.size(); }
    std::size_t num_edges() const { return label_.size() - 1; }

    Label label(int v) const { return label_[v]; }
    int parent(int v) const { return parent_[v]; }
    int subtree_size(int v) const { return size_[v]; }
    int num_children(int v) const { return nchild_[v]; }
    int depth(int v) const { return depth_[v]; }
    int first_child(int v) const { return nchild_[v] ? v + 1 : -1; }
    int next_sibling(int v) const;
    std::vector<int> children(int v) const;
    std::vector<int> address(int v) const;

    int height() const { return height_; }
    Label min_label() const;
    bool is_well_labelled() const;

    const std::vector<Label>& labels() const { return label_; }
    const std::vector<std::int32_t>& parents() const { return parent_; }

    bool operator==(const LabelledTree& o) const { return parent_ == o.parent_ && label_ == o.label_; }
    bool operator!=(const LabelledTree& o) const { return !(*this == o); }

private:
    std::vector<std::int32_t> parent_, size_, nchild_, depth_;
    std::vector<Label> label_;
    int height_ = 0;
};

// Incremental preorder construction: vertices are appended as children of a
// vertex on the rightmost branch.
class TreeBuilder {
public:
    explicit TreeBuilder(Label root_label) : parent_{-1}, label_{root_label} {}
    int add_child(int parent, Label label);
    std::size_t size() const { return label_.size(); }
    Label label(int v) const { return label_[v]; }
    LabelledTree build() &&;

private:
    std::vector<std::int32_t> parent_;
    std::vector<Label> label_;
};

LabelledTree parse_tree(const std::string& text);
std::string serialize_tree(const LabelledTree& t);
nlohmann::json tree_to_json(const LabelledTree& t);
LabelledTree tree_from_json(const nlohmann::json& j);

struct ContourPair {
    std::vector<int> C;
    std::vector<Label> V;
};

ContourPair contour_pair(const LabelledTree& t);
LabelledTree decode_contour(const ContourPair& cp);

// Contour corners: time t in [0, 2n) gives the corner of vertex corner_vertex[t].
// A single vertex has one corner.
std::vector<int> contour_vertices(const LabelledTree& t);

LabelledTree ball_tree(const LabelledTree& t, int S);
mpq_class tree_distance(const LabelledTree& a, const LabelledTree& b);

bool in_omega(const LabelledTree& t, int S, Label R);
bool in_a_alpha(const LabelledTree& t, int S, const mpq_class& alpha);

struct GenerationCensus {
    std::vector<std::vector<int>> generations;   // g_S as vertex lists
    std::map<Label, std::int64_t> label_counts;  // N_l
    std::map<Label, std::int64_t> corner_counts; // C_l
};

GenerationCensus census(const LabelledTree& t);

// Brute force: every labelled tree with n edges and the given root label,
// optionally restricted to labels >= 1. Ordered by shape then increments.
std::vector<LabelledTree> enumerate_trees(int n, Label root_label, bool well_labelled);

// All plane tree shapes with n edges, every label equal to 1.
std::vector<LabelledTree> enumerate_shapes(int n);

}  // namespace uiq
