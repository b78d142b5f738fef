#include "strider/simplify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>

namespace strider {

VertexQuadric VertexQuadric::from_plane(const Vec3& normal, double d) {
    const double len = normal.norm();
    if (len == 0.0) return VertexQuadric{};
    Eigen::Vector4d plane(normal.x() / len, normal.y() / len, normal.z() / len, d / len);
    return VertexQuadric(plane * plane.transpose());
}

VertexQuadric VertexQuadric::from_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    if (n.norm() == 0.0) return VertexQuadric{};
    const Vec3 unit = n.normalized();
    return from_plane(unit, -unit.dot(a));
}

double VertexQuadric::error(const Vec3& p) const {
    const Eigen::Vector4d v(p.x(), p.y(), p.z(), 1.0);
    return v.dot(q_ * v);
}

bool VertexQuadric::is_valid(double tol) const {
    if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(q_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

CollapseCandidate collapse_cost(const VertexQuadric& q1, const VertexQuadric& q2, const Vec3& pa, const Vec3& pb,
                                bool endpoints_only) {
    const VertexQuadric q = q1 + q2;
    CollapseCandidate best;
    bool have = false;
    auto consider = [&](const Vec3& p, Placement placement) {
        if (!p.allFinite()) return;
        const double cost = q.error(p);
        if (!have || cost < best.cost) {
            best.position = p;
            best.cost = cost;
            best.placement = placement;
            have = true;
        }
    };
    if (!endpoints_only) {
        const Eigen::Matrix3d a = q.matrix().topLeftCorner<3, 3>();
        const double det = a.determinant();
        if (std::abs(det) >= 1e-12) {
            const Vec3 rhs = -q.matrix().topRightCorner<3, 1>();
            consider(a.inverse() * rhs, Placement::optimal);
        }
    }
    consider(pa, Placement::endpoint_a);
    consider(pb, Placement::endpoint_b);
    if (!endpoints_only) consider(0.5 * (pa + pb), Placement::midpoint);
    return best;
}

namespace {

struct HeapEntry {
    double cost;
    std::size_t a;
    std::size_t b;
    std::uint64_t version_a;
    std::uint64_t version_b;
    Vec3 position;
};

struct HeapOrder {
    // std::priority_queue is a max-heap; invert so the cheapest, then the
    // smallest (a, b) pair, is on top.
    bool operator()(const HeapEntry& x, const HeapEntry& y) const {
        if (x.cost != y.cost) return x.cost > y.cost;
        if (x.a != y.a) return x.a > y.a;
        return x.b > y.b;
    }
};

class Collapser {
public:
    explicit Collapser(const Mesh& mesh)
        : pos_(mesh.vertices()),
          faces_(mesh.faces()),
          face_alive_(faces_.size(), true),
          vertex_alive_(pos_.size(), true),
          vertex_faces_(pos_.size()),
          quadric_(pos_.size()),
          version_(pos_.size(), 0),
          live_faces_(faces_.size()) {
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            const Face& face = faces_[f];
            const VertexQuadric q = VertexQuadric::from_triangle(pos_[face[0]], pos_[face[1]], pos_[face[2]]);
            for (std::size_t v : face) {
                vertex_faces_[v].push_back(f);
                quadric_[v] += q;
            }
        }
        for (const Edge& e : mesh.edges()) push(e.a, e.b);
    }

    std::size_t live_faces() const { return live_faces_; }

    /// Pops until one legal collapse is applied; false when the queue is empty.
    bool collapse_next() {
        while (!heap_.empty()) {
            const HeapEntry top = heap_.top();
            heap_.pop();
            if (!vertex_alive_[top.a] || !vertex_alive_[top.b]) continue;
            if (version_[top.a] != top.version_a || version_[top.b] != top.version_b) continue;
            if (!legal(top.a, top.b, top.position)) continue;
            apply(top.a, top.b, top.position);
            return true;
        }
        return false;
    }

    SimplifyResult finish(bool reached, std::size_t collapses) const {
        std::vector<std::size_t> remap(pos_.size(), 0);
        std::vector<Vec3> vertices;
        SimplifyResult result;
        for (std::size_t v = 0; v < pos_.size(); ++v) {
            if (!vertex_alive_[v]) continue;
            remap[v] = vertices.size();
            vertices.push_back(pos_[v]);
            result.source_vertex.push_back(v);
        }
        std::vector<Face> faces;
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f]) continue;
            faces.push_back({remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]});
        }
        result.mesh = Mesh(std::move(vertices), std::move(faces));
        result.reached_target = reached;
        result.collapses = collapses;
        return result;
    }

private:
    std::vector<std::size_t> neighbors(std::size_t v) const {
        std::vector<std::size_t> out;
        for (std::size_t f : vertex_faces_[v]) {
            for (std::size_t u : faces_[f]) {
                if (u != v) out.push_back(u);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::size_t faces_on_edge(std::size_t a, std::size_t b) const {
        std::size_t count = 0;
        for (std::size_t f : vertex_faces_[a]) {
            const Face& face = faces_[f];
            if (face[0] == b || face[1] == b || face[2] == b) ++count;
        }
        return count;
    }

    bool on_boundary(std::size_t v) const {
        for (std::size_t u : neighbors(v)) {
            if (faces_on_edge(v, u) != 2) return true;
        }
        return false;
    }

    void push(std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        const bool boundary_a = on_boundary(a);
        const bool boundary_b = on_boundary(b);
        CollapseCandidate c = collapse_cost(quadric_[a], quadric_[b], pos_[a], pos_[b], boundary_a || boundary_b);
        // A single boundary endpoint pins the placement so the rim does not drift.
        if (boundary_a && !boundary_b) {
            c.position = pos_[a];
            c.cost = (quadric_[a] + quadric_[b]).error(pos_[a]);
        } else if (boundary_b && !boundary_a) {
            c.position = pos_[b];
            c.cost = (quadric_[a] + quadric_[b]).error(pos_[b]);
        }
        heap_.push(HeapEntry{c.cost, a, b, version_[a], version_[b], c.position});
    }

    bool legal(std::size_t a, std::size_t b, const Vec3& target) const {
        const auto na = neighbors(a);
        const auto nb = neighbors(b);
        if (!std::binary_search(na.begin(), na.end(), b)) return false;

        std::vector<std::size_t> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
        const std::size_t shared = faces_on_edge(a, b);
        if (shared == 0 || shared > 2 || common.size() != shared) return false;

        const bool boundary = shared == 1 || on_boundary(a) || on_boundary(b);
        const std::size_t merged_degree = na.size() + nb.size() - 2 - common.size();
        if (merged_degree < (boundary ? 2u : 3u)) return false;
        for (std::size_t c : common) {
            const std::size_t min_degree = on_boundary(c) ? 3 : 4;
            if (neighbors(c).size() < min_degree) return false;
        }

        for (std::size_t v : {a, b}) {
            for (std::size_t f : vertex_faces_[v]) {
                const Face& face = faces_[f];
                const bool has_a = face[0] == a || face[1] == a || face[2] == a;
                const bool has_b = face[0] == b || face[1] == b || face[2] == b;
                if (has_a && has_b) continue;
                std::array<Vec3, 3> before;
                std::array<Vec3, 3> after;
                for (std::size_t k = 0; k < 3; ++k) {
                    before[k] = pos_[face[k]];
                    after[k] = face[k] == v ? target : pos_[face[k]];
                }
                const Vec3 n0 = (before[1] - before[0]).cross(before[2] - before[0]);
                const Vec3 n1 = (after[1] - after[0]).cross(after[2] - after[0]);
                if (n1.norm() <= 1e-12 * std::max(1.0, n0.norm())) return false;
                if (n0.dot(n1) < 0.0) return false;
            }
        }
        return true;
    }

    void apply(std::size_t a, std::size_t b, const Vec3& target) {
        pos_[a] = target;
        quadric_[a] += quadric_[b];
        for (std::size_t f : vertex_faces_[b]) {
            Face& face = faces_[f];
            const bool has_a = face[0] == a || face[1] == a || face[2] == a;
            if (has_a) {
                face_alive_[f] = false;
                --live_faces_;
                continue;
            }
            for (std::size_t& v : face) {
                if (v == b) v = a;
            }
            vertex_faces_[a].push_back(f);
        }
        vertex_faces_[b].clear();
        vertex_alive_[b] = false;
        auto& fa = vertex_faces_[a];
        fa.erase(std::remove_if(fa.begin(), fa.end(), [&](std::size_t f) { return !face_alive_[f]; }), fa.end());
        std::sort(fa.begin(), fa.end());
        for (std::size_t c : neighbors(a)) {
            auto& fc = vertex_faces_[c];
            fc.erase(std::remove_if(fc.begin(), fc.end(), [&](std::size_t f) { return !face_alive_[f]; }), fc.end());
        }

        // Re-queue the 1-ring edges and their neighbors' edges: legality of
        // previously rejected collapses may have changed.
        const auto ring = neighbors(a);
        ++version_[a];
        for (std::size_t c : ring) ++version_[c];
        for (std::size_t c : ring) push(a, c);
        for (std::size_t c : ring) {
            for (std::size_t d : neighbors(c)) {
                if (d != a) push(c, d);
            }
        }
    }

    std::vector<Vec3> pos_;
    std::vector<Face> faces_;
    std::vector<bool> face_alive_;
    std::vector<bool> vertex_alive_;
    std::vector<std::vector<std::size_t>> vertex_faces_;
    std::vector<VertexQuadric> quadric_;
    std::vector<std::uint64_t> version_;
    std::size_t live_faces_;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap_;
};

}  // namespace

SimplifyResult simplify_to_face_count(const Mesh& mesh, std::size_t target_faces) {
    if (target_faces == 0) throw std::invalid_argument("simplify_to_face_count: target_faces must be positive");
    if (mesh.face_count() <= target_faces) {
        SimplifyResult result;
        result.mesh = mesh;
        result.source_vertex.resize(mesh.vertex_count());
        for (std::size_t v = 0; v < mesh.vertex_count(); ++v) result.source_vertex[v] = v;
        return result;
    }
    Collapser collapser(mesh);
    std::size_t collapses = 0;
    bool reached = true;
    while (collapser.live_faces() > target_faces) {
        if (!collapser.collapse_next()) {
            reached = false;
            break;
        }
        ++collapses;
    }
    return collapser.finish(reached, collapses);
}

std::vector<int> transfer_vertex_labels(const SimplifyResult& result, const std::vector<int>& input_labels) {
    std::vector<int> out;
    out.reserve(result.source_vertex.size());
    for (std::size_t v : result.source_vertex) out.push_back(input_labels.at(v));
    return out;
}

}  // namespace strider
