#include "uiq/maps.hpp"

#include <algorithm>
#include <deque>

#include "uiq/error.hpp"

namespace uiq {

RotationMap::RotationMap(std::vector<int> twin, std::vector<int> next, int root)
    : twin_(std::move(twin)), next_(std::move(next)), root_(root) {
    const int D = static_cast<int>(twin_.size());
    if (D == 0) {
        if (!next_.empty() || root_ != -1) throw DomainError("map: empty map must have no root");
        return;
    }
    if (D % 2 || static_cast<int>(next_.size()) != D) throw DomainError("map: dart arrays of wrong size");
    if (root_ < 0 || root_ >= D) throw DomainError("map: root dart out of range");
    std::vector<char> seen(D, 0);
    for (int d = 0; d < D; ++d) {
        int t = twin_[d];
        if (t < 0 || t >= D || t == d || twin_[t] != d) throw DomainError("map: twin is not a fixed-point-free involution");
        int n = next_[d];
        if (n < 0 || n >= D || seen[n]) throw DomainError("map: next_at_vertex is not a permutation");
        seen[n] = 1;
    }
    vertex_.assign(D, -1);
    face_.assign(D, -1);
    for (int d = 0; d < D; ++d) {
        if (vertex_[d] >= 0) continue;
        int len = 0;
        for (int e = d; vertex_[e] < 0; e = next_[e], ++len) vertex_[e] = nv_;
        deg_.push_back(len);
        vdart_.push_back(d);
        ++nv_;
    }
    for (int d = 0; d < D; ++d) {
        if (face_[d] >= 0) continue;
        int len = 0;
        for (int e = d; face_[e] < 0; e = face_next(e), ++len) face_[e] = nf_;
        fdeg_.push_back(len);
        fdart_.push_back(d);
        ++nf_;
    }
}

nlohmann::json map_to_json(const RotationMap& m) {
    return {{"twin", m.twins()}, {"next_at_vertex", m.nexts()}, {"root", m.root()}};
}

RotationMap map_from_json(const nlohmann::json& j) {
    try {
        return RotationMap(j.at("twin").get<std::vector<int>>(), j.at("next_at_vertex").get<std::vector<int>>(),
                           j.at("root").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("map json: ") + e.what());
    } catch (const DomainError& e) {
        throw ParseError(std::string("map json: ") + e.what());
    }
}

std::vector<int> bfs_distances(const RotationMap& m) {
    std::vector<int> dist(m.num_vertices(), -1);
    if (m.empty()) return dist;
    std::deque<int> queue{m.root_vertex()};
    dist[m.root_vertex()] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        int d0 = m.vertex_dart(v), d = d0;
        do {
            int u = m.vertex(m.twin(d));
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
            d = m.next(d);
        } while (d != d0);
    }
    return dist;
}

QuadDiagnostics validate_quadrangulation(const RotationMap& m) {
    QuadDiagnostics q;
    auto fail = [&](std::string why) {
        q.valid = false;
        q.problems.push_back(std::move(why));
    };
    if (m.empty()) {
        fail("empty map");
        return q;
    }
    q.V = m.num_vertices();
    q.E = m.num_edges();
    q.F = m.num_faces();
    auto dist = bfs_distances(m);
    for (int v = 0; v < q.V; ++v)
        if (dist[v] < 0) {
            fail("disconnected: vertex orbit at dart " + std::to_string(m.vertex_dart(v)) + " unreachable");
            break;
        }
    if (q.V - q.E + q.F != 2) fail("Euler characteristic " + std::to_string(q.V - q.E + q.F) + " != 2");
    for (int f = 0; f < q.F; ++f)
        if (m.face_degree(f) != 4)
            fail("face orbit at dart " + std::to_string(m.face_dart(f)) + " has degree " +
                 std::to_string(m.face_degree(f)));
    if (q.valid) {
        for (int d = 0; d < m.num_darts(); ++d) {
            int a = dist[m.vertex(d)], b = dist[m.vertex(m.twin(d))];
            if (a - b != 1 && b - a != 1) {
                fail("edge at dart " + std::to_string(d) + " does not join consecutive distances");
                break;
            }
        }
    }
    return q;
}

namespace {

// Sub-map made of the edges bordering at least one face f with keep[f].
BallMap restrict_faces(const RotationMap& m, const std::vector<int>& dist, const std::vector<char>& keep_face,
                       const std::vector<char>* retained_in, int R) {
    BallMap b;
    b.R = R;
    const int D = m.num_darts();
    auto kept_face = [&](int d) { return keep_face[m.face(d)] && (!retained_in || (*retained_in)[d]); };
    std::vector<int> id(D, -1);
    int count = 0;
    for (int d = 0; d < D; ++d)
        if (kept_face(d) || kept_face(m.twin(d))) id[d] = count++;
    if (count == 0) return b;
    if (id[m.root()] < 0) throw DomainError("ball: root dart not in ball");
    std::vector<int> twin(count), next(count);
    std::vector<char> ret(count);
    for (int d = 0; d < D; ++d) {
        if (id[d] < 0) continue;
        twin[id[d]] = id[m.twin(d)];
        int e = m.next(d);
        while (id[e] < 0) e = m.next(e);
        next[id[d]] = id[e];
        ret[id[d]] = kept_face(d);
    }
    b.map = RotationMap(std::move(twin), std::move(next), id[m.root()]);
    b.retained = std::move(ret);
    b.dist.assign(b.map.num_vertices(), 0);
    for (int d = 0; d < D; ++d)
        if (id[d] >= 0) b.dist[b.map.vertex(id[d])] = dist[m.vertex(d)];
    std::vector<char> seen(b.map.num_faces(), 0);
    for (int d = 0; d < count; ++d) {
        int f = b.map.face(d);
        if (b.retained[d] || seen[f]) continue;
        seen[f] = 1;
        std::vector<int> cyc;
        int e = d;
        do {
            cyc.push_back(e);
            e = b.map.face_next(e);
        } while (e != d);
        b.boundary.push_back(std::move(cyc));
    }
    return b;
}

}  // namespace

BallMap ball(const RotationMap& m, int R) {
    if (R < 0) throw DomainError("ball: R must be >= 0");
    if (R == 0 || m.empty()) return BallMap{R, {}, {}, {}, {}};
    auto dist = bfs_distances(m);
    std::vector<char> keep(m.num_faces(), 0);
    for (int d = 0; d < m.num_darts(); ++d)
        if (dist[m.vertex(d)] < R) keep[m.face(d)] = 1;
    return restrict_faces(m, dist, keep, nullptr, R);
}

BallMap ball(const BallMap& b, int R) {
    if (R < 0 || R > b.R) throw DomainError("ball: radius must lie in [0, R of the ball]");
    if (R == 0 || b.empty()) return BallMap{R, {}, {}, {}, {}};
    const auto& m = b.map;
    std::vector<char> keep(m.num_faces(), 0);
    for (int d = 0; d < m.num_darts(); ++d)
        if (b.retained[d] && b.dist[m.vertex(d)] < R) keep[m.face(d)] = 1;
    return restrict_faces(m, b.dist, keep, &b.retained, R);
}

RotationMap krikun_complete(const BallMap& b) {
    if (b.empty()) throw DomainError("krikun_complete: empty ball");
    const auto& m = b.map;
    const int R = b.R;
    std::vector<int> twin = m.twins(), next = m.nexts();
    for (const auto& cyc : b.boundary) {
        std::vector<int> top;  // positions whose origin is at distance R+1
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            int here = b.dist[m.vertex(cyc[i])], there = b.dist[m.vertex(cyc[(i + 1) % cyc.size()])];
            if (!((here == R && there == R + 1) || (here == R + 1 && there == R)))
                throw DomainError("krikun_complete: boundary cycle does not alternate R, R+1");
            if (here == R + 1) top.push_back(static_cast<int>(i));
        }
        const int base = static_cast<int>(twin.size());
        const int k = static_cast<int>(top.size());
        twin.resize(base + 2 * k);
        next.resize(base + 2 * k);
        for (int j = 0; j < k; ++j) {
            int i = top[j];
            int x = base + 2 * j, y = x + 1;  // x leaves the boundary vertex, y leaves the new vertex
            twin[x] = y;
            twin[y] = x;
            int prev = cyc[(i + cyc.size() - 1) % cyc.size()];
            int at = m.twin(prev);  // next(at) == cyc[i] in the ball
            next[x] = next[at];
            next[at] = x;
            next[y] = base + 2 * ((j + k - 1) % k) + 1;
        }
    }
    return RotationMap(std::move(twin), std::move(next), m.root());
}

namespace {

void put_varint(std::string& out, unsigned long long v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

std::string hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * bytes.size());
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

// BFS dart numbering from the root; darts of a vertex get consecutive indices
// following next from the entry dart.
std::vector<int> bfs_dart_order(const RotationMap& m, std::vector<int>& index, std::vector<int>& degrees) {
    const int D = m.num_darts();
    index.assign(D, -1);
    std::vector<int> order;
    order.reserve(D);
    auto open = [&](int entry) {
        int d = entry, deg = 0;
        do {
            index[d] = static_cast<int>(order.size());
            order.push_back(d);
            ++deg;
            d = m.next(d);
        } while (d != entry);
        degrees.push_back(deg);
    };
    open(m.root());
    for (std::size_t i = 0; i < order.size(); ++i) {
        int t = m.twin(order[i]);
        if (index[t] < 0) open(t);
    }
    return order;
}

std::string encode(const RotationMap& m, const std::vector<char>* flags, int R) {
    std::string bytes;
    if (m.empty()) {
        put_varint(bytes, 0);
        if (flags) put_varint(bytes, static_cast<unsigned long long>(R));
        return hex(bytes);
    }
    std::vector<int> index, degrees;
    auto order = bfs_dart_order(m, index, degrees);
    put_varint(bytes, order.size());
    put_varint(bytes, degrees.size());
    for (int deg : degrees) put_varint(bytes, deg);
    for (int d : order) put_varint(bytes, index[m.twin(d)]);
    if (flags) {
        put_varint(bytes, static_cast<unsigned long long>(R));
        for (int d : order) bytes.push_back((*flags)[d] ? 1 : 0);
    }
    return hex(bytes);
}

}  // namespace

std::string canonical_code(const RotationMap& m) { return encode(m, nullptr, 0); }

std::string canonical_code(const BallMap& b) { return encode(b.map, &b.retained, b.R); }

mpq_class map_distance(const RotationMap& a, const RotationMap& b) {
    if (a.empty() || b.empty()) throw DomainError("map_distance: empty map");
    if (canonical_code(a) == canonical_code(b)) return 0;
    auto da = bfs_distances(a), db = bfs_distances(b);
    int top = std::max(*std::max_element(da.begin(), da.end()), *std::max_element(db.begin(), db.end())) + 1;
    for (int R = 1; R <= top; ++R) {
        // B_0 is the common empty ball, so agreement holds up to R - 1
        auto ba = ball(a, R), bb = ball(b, R);
        if (canonical_code(ba) != canonical_code(bb)) return mpq_class(1, R);
    }
    return mpq_class(1, top + 1);
}

}  // namespace uiq
