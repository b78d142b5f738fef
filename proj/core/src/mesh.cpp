#include "strider/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "strider/errors.hpp"

namespace strider {

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    build_derived();
}

void Mesh::build_derived() {
    const std::size_t n = vertices_.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(faces_.size() * 3);
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const Face& face = faces_[f];
        for (std::size_t k = 0; k < 3; ++k) {
            if (face[k] >= n) {
                throw DataError("face " + std::to_string(f) + " references vertex " + std::to_string(face[k]) +
                                " but mesh has " + std::to_string(n) + " vertices (index out of range)");
            }
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            throw DataError("face " + std::to_string(f) + " is degenerate (repeated vertex index)");
        }
        for (std::size_t k = 0; k < 3; ++k) {
            std::size_t u = face[k];
            std::size_t v = face[(k + 1) % 3];
            if (u > v) std::swap(u, v);
            pairs.emplace_back(u, v);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    edges_.clear();
    edges_.reserve(pairs.size());
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [u, v] : pairs) {
        edges_.push_back(Edge{u, v, (vertices_[u] - vertices_[v]).norm()});
        ++degree[u];
        ++degree[v];
    }

    adjacency_offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) adjacency_offsets_[v + 1] = adjacency_offsets_[v] + degree[v];
    adjacency_.assign(adjacency_offsets_[n], 0);
    std::vector<std::size_t> cursor(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
    for (const auto& [u, v] : pairs) {
        adjacency_[cursor[u]++] = v;
        adjacency_[cursor[v]++] = u;
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[v]),
                  adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[v + 1]));
    }
}

bool Mesh::adjacent(std::size_t u, std::size_t v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

Mesh Mesh::with_positions(std::vector<Vec3> positions) const {
    if (positions.size() != vertices_.size()) {
        throw std::invalid_argument("with_positions: vertex count mismatch");
    }
    Mesh out = *this;
    out.vertices_ = std::move(positions);
    for (Edge& e : out.edges_) e.length = (out.vertices_[e.a] - out.vertices_[e.b]).norm();
    return out;
}

double Mesh::mean_edge_length() const {
    if (edges_.empty()) return 0.0;
    double sum = 0.0;
    for (const Edge& e : edges_) sum += e.length;
    return sum / static_cast<double>(edges_.size());
}

std::uint64_t Mesh::content_hash() const {
    std::uint64_t h = fnv1a64(nullptr, 0);
    for (const Vec3& p : vertices_) h = fnv1a64(p.data(), 3 * sizeof(double), h);
    for (const Face& f : faces_) {
        const std::uint64_t idx[3] = {f[0], f[1], f[2]};
        h = fnv1a64(idx, sizeof(idx), h);
    }
    return h;
}

void MeshLabels::validate(int num_classes, std::size_t vertex_count) const {
    if (class_id) {
        if (*class_id < 0 || *class_id >= num_classes) {
            throw DataError("class id " + std::to_string(*class_id) + " outside [0, " + std::to_string(num_classes) + ")");
        }
        return;
    }
    if (vertex_segments.size() != vertex_count) {
        throw DataError("segment label count " + std::to_string(vertex_segments.size()) + " does not match vertex count " +
                        std::to_string(vertex_count));
    }
    for (int s : vertex_segments) {
        if (s < 0 || s >= num_classes) {
            throw DataError("segment id " + std::to_string(s) + " outside [0, " + std::to_string(num_classes) + ")");
        }
    }
}

Mesh normalize_unit_sphere(const Mesh& mesh) {
    std::vector<Vec3> pos = mesh.vertices();
    if (pos.empty()) return mesh;
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : pos) centroid += p;
    centroid /= static_cast<double>(pos.size());
    double radius = 0.0;
    for (Vec3& p : pos) {
        p -= centroid;
        radius = std::max(radius, p.norm());
    }
    // A radius at rounding level means all vertices coincide.
    if (radius > 1e-12 * (1.0 + centroid.norm())) {
        for (Vec3& p : pos) p /= radius;
    } else {
        for (Vec3& p : pos) p.setZero();
    }
    return mesh.with_positions(std::move(pos));
}

Mat3 euler_rotation(double alpha, double beta, double gamma) {
    const Mat3 rx = Eigen::AngleAxisd(alpha, Vec3::UnitX()).toRotationMatrix();
    const Mat3 ry = Eigen::AngleAxisd(beta, Vec3::UnitY()).toRotationMatrix();
    const Mat3 rz = Eigen::AngleAxisd(gamma, Vec3::UnitZ()).toRotationMatrix();
    return rz * ry * rx;
}

Mat3 random_rotation_matrix(Rng& rng) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double alpha = two_pi * rng.uniform01();
    const double beta = two_pi * rng.uniform01();
    const double gamma = two_pi * rng.uniform01();
    return euler_rotation(alpha, beta, gamma);
}

Mesh rotate(const Mesh& mesh, const Mat3& rotation) {
    std::vector<Vec3> pos;
    pos.reserve(mesh.vertex_count());
    for (const Vec3& p : mesh.vertices()) pos.push_back(rotation * p);
    return mesh.with_positions(std::move(pos));
}

Mesh random_rotation(const Mesh& mesh, Rng& rng) { return rotate(mesh, random_rotation_matrix(rng)); }

std::vector<std::size_t> connected_components(const Mesh& mesh) {
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> component(mesh.vertex_count(), unset);
    std::vector<std::size_t> stack;
    std::size_t next_id = 0;
    for (std::size_t seed = 0; seed < mesh.vertex_count(); ++seed) {
        if (component[seed] != unset) continue;
        component[seed] = next_id;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t u : mesh.neighbors(v)) {
                if (component[u] == unset) {
                    component[u] = next_id;
                    stack.push_back(u);
                }
            }
        }
        ++next_id;
    }
    return component;
}

}  // namespace strider
