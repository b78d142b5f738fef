#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

#include "strider/mesh.hpp"
#include "strider/rng.hpp"

namespace strider {

/// Vertices in discovery order. jump_flags[t] marks a step that began with a
/// random restart after the backtrack exhausted the sequence.
struct Walk {
    std::vector<std::size_t> vertices;
    std::vector<bool> jump_flags;

    std::size_t size() const noexcept { return vertices.size(); }
    std::size_t start_vertex() const { return vertices.front(); }
};

/// Row t holds the (dx, dy, dz) translation from step t-1; row 0 is zero.
using WalkFeatures = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// ceil(vertex_count / 2.5)
std::size_t default_walk_length(std::size_t vertex_count);

/// Neighbor lookup used by the step rule; Mesh satisfies it, tests may use a
/// bare graph.
class NeighborGraph {
public:
    virtual ~NeighborGraph() = default;
    virtual std::size_t vertex_count() const = 0;
    virtual std::span<const std::size_t> neighbors(std::size_t v) const = 0;
};

class MeshGraph final : public NeighborGraph {
public:
    explicit MeshGraph(const Mesh& mesh) : mesh_(mesh) {}
    std::size_t vertex_count() const override { return mesh_.vertex_count(); }
    std::span<const std::size_t> neighbors(std::size_t v) const override { return mesh_.neighbors(v); }

private:
    const Mesh& mesh_;
};

/// Random walk with backtracking and restarts. The length is clamped to the
/// vertex count.
Walk generate_walk(const NeighborGraph& graph, std::size_t start_vertex, std::size_t length, Rng& rng);
Walk generate_walk(const Mesh& mesh, std::size_t start_vertex, std::size_t length, Rng& rng);

WalkFeatures walk_features(const Mesh& mesh, const Walk& walk);

}  // namespace strider
