#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uiq/maps.hpp"
#include "uiq/tree.hpp"

namespace uiq {

// Corners of one face of the map obtained after joining v0 to the label-1
// corners. Finite faces use indices 0..k-1 with index 0 at v0. The infinite
// face uses 0 for v0, positive indices on the right of the spine and negative
// ones on the left; a window lists only part of it, and every corner with
// label <= certified_label is guaranteed to be listed.
struct CornerSequence {
    struct Corner {
        long long index;
        int vertex;
        Label label;
    };
    bool infinite = false;
    std::vector<Corner> corners;  // sorted by index
    Label certified_label = 0;    // infinite windows only
};

long long successor(const CornerSequence& seq, long long index);
nlohmann::json corners_to_json(const CornerSequence& seq);

struct ChordSet {
    std::vector<std::pair<long long, long long>> chords;
};

// True when no two chords cross when drawn inside the face in index order.
bool chords_planar(const ChordSet& chords);
nlohmann::json chords_to_json(const ChordSet& chords);

// The rooted quadrangulation of a well-labelled tree with root label 1 and at
// least one edge. Vertex ids: tree vertex v in preorder is the vertex of dart
// 2 * (first contour time of v); v0 is the origin of the root dart.
RotationMap phi(const LabelledTree& t);

// For every vertex v of t, a dart whose origin corresponds to v in phi(t)
// (index t.num_vertices() refers to v0).
std::vector<int> phi_vertex_darts(const LabelledTree& t);

struct LiteralPhi {
    RotationMap intermediate;              // tree edges + edges to v0 + chords
    std::vector<Label> intermediate_label; // label of each vertex of the intermediate map
    int triangles = 0, quadrangles = 0;
    std::vector<std::string> bad_faces;    // faces of neither allowed type
    bool chords_planar = true;
    RotationMap result;                    // after deleting equal-label tree edges
};

// Steps 1-3 carried out literally, for validation only.
LiteralPhi phi_literal(const LabelledTree& t);

// Corner sequences of the faces created by joining v0 to the label-1 corners.
std::vector<CornerSequence> step1_faces(const LabelledTree& t);

LabelledTree phi_inverse(const RotationMap& q);

// ball(phi(ball_tree(t, S)), R); requires that no vertex above generation S
// carries a label <= R+1.
BallMap window_ball(const LabelledTree& t, int S, int R);

// Drops what cannot influence the radius-R ball of phi(t): subtrees with all
// labels >= R+2 become a single leaf when they hang from a vertex labelled
// R+1 and vanish otherwise, and branches of such labels that only lead to one
// smaller vertex shrink to a monotone path.
LabelledTree prune_for_ball(const LabelledTree& t, int R);

}  // namespace uiq
