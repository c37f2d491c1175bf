#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace uiq {

// Rooted combinatorial map on darts 0..2E-1. twin is a fixed-point-free
// involution, next is the counterclockwise successor around the dart's
// origin. Faces are the orbits of next(twin(.)). Immutable once built.
class RotationMap {
public:
    RotationMap() = default;  // the empty map
    RotationMap(std::vector<int> twin, std::vector<int> next, int root);

    bool empty() const { return twin_.empty(); }
    int num_darts() const { return static_cast<int>(twin_.size()); }
    int num_edges() const { return num_darts() / 2; }
    int num_vertices() const { return nv_; }
    int num_faces() const { return nf_; }

    int twin(int d) const { return twin_[d]; }
    int next(int d) const { return next_[d]; }
    int face_next(int d) const { return next_[twin_[d]]; }
    int root() const { return root_; }
    int vertex(int d) const { return vertex_[d]; }
    int face(int d) const { return face_[d]; }
    int root_vertex() const { return vertex_[root_]; }
    int degree(int v) const { return deg_[v]; }
    // one dart leaving each vertex
    int vertex_dart(int v) const { return vdart_[v]; }
    int face_dart(int f) const { return fdart_[f]; }
    int face_degree(int f) const { return fdeg_[f]; }

    const std::vector<int>& twins() const { return twin_; }
    const std::vector<int>& nexts() const { return next_; }

private:
    std::vector<int> twin_, next_;
    int root_ = -1;
    std::vector<int> vertex_, face_, deg_, vdart_, fdart_, fdeg_;
    int nv_ = 0, nf_ = 0;
};

nlohmann::json map_to_json(const RotationMap& m);
RotationMap map_from_json(const nlohmann::json& j);

struct QuadDiagnostics {
    bool valid = true;
    int V = 0, E = 0, F = 0;
    std::vector<std::string> problems;
};

QuadDiagnostics validate_quadrangulation(const RotationMap& m);

// Graph distances from the root vertex, indexed by vertex id; -1 if unreachable.
std::vector<int> bfs_distances(const RotationMap& m);

// Union of the faces having a vertex at distance < R from the root vertex.
struct BallMap {
    int R = 0;
    RotationMap map;                          // empty when R = 0
    std::vector<char> retained;               // per dart: its face is one of the kept faces
    std::vector<int> dist;                    // per vertex of map
    std::vector<std::vector<int>> boundary;   // dart orbits of the complementary components
    bool empty() const { return map.empty(); }
};

BallMap ball(const RotationMap& m, int R);
// Ball of radius R <= b.R inside an existing ball.
BallMap ball(const BallMap& b, int R);
RotationMap krikun_complete(const BallMap& b);

std::string canonical_code(const RotationMap& m);
std::string canonical_code(const BallMap& b);

mpq_class map_distance(const RotationMap& a, const RotationMap& b);

}  // namespace uiq
