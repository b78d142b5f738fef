#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "strider/mesh.hpp"

namespace strider {

/// Symmetric 4x4 quadric error matrix; error(p) = [p 1] Q [p 1]^T.
class VertexQuadric {
public:
    VertexQuadric() : q_(Eigen::Matrix4d::Zero()) {}
    explicit VertexQuadric(const Eigen::Matrix4d& q) : q_(q) {}

    /// Quadric of the plane n.p + d = 0 (n need not be unit; it is normalized).
    static VertexQuadric from_plane(const Vec3& normal, double d);
    /// Plane quadric of a triangle; zero for zero-area triangles.
    static VertexQuadric from_triangle(const Vec3& a, const Vec3& b, const Vec3& c);

    const Eigen::Matrix4d& matrix() const noexcept { return q_; }
    double error(const Vec3& p) const;

    /// Symmetric and positive semi-definite within `tol`.
    bool is_valid(double tol = 1e-9) const;

    VertexQuadric& operator+=(const VertexQuadric& other) {
        q_ += other.q_;
        return *this;
    }
    friend VertexQuadric operator+(VertexQuadric a, const VertexQuadric& b) { return a += b; }

private:
    Eigen::Matrix4d q_;
};

enum class Placement { optimal, endpoint_a, endpoint_b, midpoint };

struct CollapseCandidate {
    std::size_t a = 0;
    std::size_t b = 0;
    Vec3 position = Vec3::Zero();
    double cost = 0.0;
    Placement placement = Placement::optimal;
};

/// Cheapest of {quadric-optimal point, a, b, midpoint} under q1 + q2. The
/// optimal point is skipped when its 3x3 system has |det| < 1e-12 or when
/// `endpoints_only` is set (used for boundary vertices).
CollapseCandidate collapse_cost(const VertexQuadric& q1, const VertexQuadric& q2, const Vec3& pa, const Vec3& pb,
                                bool endpoints_only = false);

struct SimplifyResult {
    Mesh mesh;
    /// reached_target is false when no legal collapse remained before the target.
    bool reached_target = true;
    std::size_t collapses = 0;
    /// Output vertex -> input vertex that survived into it.
    std::vector<std::size_t> source_vertex;
};

/// Greedy quadric-error edge collapse down to at most `target_faces` faces.
SimplifyResult simplify_to_face_count(const Mesh& mesh, std::size_t target_faces);

/// Transfers per-vertex labels through a simplification.
std::vector<int> transfer_vertex_labels(const SimplifyResult& result, const std::vector<int>& input_labels);

}  // namespace strider
