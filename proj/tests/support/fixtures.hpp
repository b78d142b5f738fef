#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "strider/mesh.hpp"
#include "strider/walker.hpp"

namespace fixtures {

using strider::Face;
using strider::Mesh;
using strider::Vec3;

inline Mesh tetrahedron(const Vec3& offset = Vec3::Zero()) {
    std::vector<Vec3> v{Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    for (auto& p : v) p += offset;
    return Mesh(v, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

inline Mesh two_tetrahedra() {
    std::vector<Vec3> v;
    std::vector<Face> f;
    for (int copy = 0; copy < 2; ++copy) {
        const Mesh t = tetrahedron(Vec3(5.0 * copy, 0, 0));
        const std::size_t base = v.size();
        for (const auto& p : t.vertices()) v.push_back(p);
        for (const auto& face : t.faces()) f.push_back({face[0] + base, face[1] + base, face[2] + base});
    }
    return Mesh(v, f);
}

inline Mesh triangle() { return Mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}}); }

/// Closed cube with 8 corners at (+-h, +-h, +-h), two triangles per side.
inline Mesh cube(double h = 1.0) {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(i & 1 ? h : -h, i & 2 ? h : -h, i & 4 ? h : -h);
    std::vector<Face> f{{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                        {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return Mesh(v, f);
}

/// Bare adjacency lists (no geometry) for walker tests.
class ListGraph final : public strider::NeighborGraph {
public:
    explicit ListGraph(std::vector<std::vector<std::size_t>> adj) : adj_(std::move(adj)) {}
    std::size_t vertex_count() const override { return adj_.size(); }
    std::span<const std::size_t> neighbors(std::size_t v) const override { return adj_[v]; }

private:
    std::vector<std::vector<std::size_t>> adj_;
};

/// Path 0-1-2-...-(n-1).
inline ListGraph path_graph(std::size_t n) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        adj[i].push_back(i + 1);
        adj[i + 1].push_back(i);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return ListGraph(std::move(adj));
}

/// Counts face incidences per undirected edge straight from the face list.
inline std::map<std::pair<std::size_t, std::size_t>, int> edge_incidence(std::span<const Face> faces) {
    std::map<std::pair<std::size_t, std::size_t>, int> count;
    for (const Face& f : faces) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t a = f[k], b = f[(k + 1) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    }
    return count;
}

inline bool is_closed_manifold(const Mesh& m) {
    const auto count = edge_incidence(m.faces());
    return !count.empty() && std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

/// Every directed edge appears once: neighbouring faces traverse shared edges
/// in opposite directions.
inline bool is_consistently_oriented(const Mesh& m) {
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    for (const Face& f : m.faces()) {
        for (int k = 0; k < 3; ++k) {
            if (++directed[{f[k], f[(k + 1) % 3]}] > 1) return false;
        }
    }
    return true;
}

inline long euler_characteristic(const Mesh& m) {
    return static_cast<long>(m.vertex_count()) - static_cast<long>(edge_incidence(m.faces()).size()) +
           static_cast<long>(m.face_count());
}

inline double face_area(const Mesh& m, const Face& f) {
    const Vec3 a = m.position(f[0]), b = m.position(f[1]), c = m.position(f[2]);
    const Vec3 e1 = b - a, e2 = c - a;
    return 0.5 * Vec3(e1.y() * e2.z() - e1.z() * e2.y(), e1.z() * e2.x() - e1.x() * e2.z(), e1.x() * e2.y() - e1.y() * e2.x()).norm();
}

inline bool has_degenerate_face(const Mesh& m, double min_area = 1e-14) {
    for (const Face& f : m.faces()) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return true;
        if (face_area(m, f) < min_area) return true;
    }
    return false;
}

}  // namespace fixtures
