#include "strider/walker.hpp"

#include <stdexcept>

namespace strider {

std::size_t default_walk_length(std::size_t vertex_count) {
    if (vertex_count == 0) throw std::invalid_argument("default_walk_length: vertex_count must be positive");
    // ceil(V / 2.5) == ceil(2V / 5), exact in integers
    return (2 * vertex_count + 4) / 5;
}

namespace {

/// Uniform pick among un-visited neighbors of v, or npos when none remain.
constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::size_t pick_unvisited_neighbor(const NeighborGraph& graph, std::size_t v, const std::vector<bool>& visited,
                                    Rng& rng, std::vector<std::size_t>& scratch) {
    scratch.clear();
    for (std::size_t u : graph.neighbors(v)) {
        if (!visited[u]) scratch.push_back(u);
    }
    if (scratch.empty()) return npos;
    return scratch[rng.uniform_index(scratch.size())];
}

}  // namespace

Walk generate_walk(const NeighborGraph& graph, std::size_t start_vertex, std::size_t length, Rng& rng) {
    const std::size_t n = graph.vertex_count();
    if (start_vertex >= n) throw std::out_of_range("generate_walk: start vertex out of range");
    if (length == 0) throw std::invalid_argument("generate_walk: length must be positive");
    length = std::min(length, n);

    Walk walk;
    walk.vertices.reserve(length);
    walk.jump_flags.reserve(length);
    std::vector<bool> visited(n, false);
    std::vector<std::size_t> scratch;

    walk.vertices.push_back(start_vertex);
    walk.jump_flags.push_back(false);
    visited[start_vertex] = true;

    // Positions below `exhausted_floor` have been seen with no un-visited
    // neighbor; visited only grows, so they never need re-checking.
    std::size_t exhausted_floor = 0;
    std::vector<bool> exhausted;
    exhausted.reserve(length);
    exhausted.push_back(false);

    while (walk.vertices.size() < length) {
        std::size_t next = npos;
        // Current vertex first, then backwards along the discovery sequence.
        for (std::size_t pos = walk.vertices.size(); pos-- > exhausted_floor;) {
            if (exhausted[pos]) continue;
            next = pick_unvisited_neighbor(graph, walk.vertices[pos], visited, rng, scratch);
            if (next != npos) break;
            exhausted[pos] = true;
            if (pos == exhausted_floor) {
                while (exhausted_floor < exhausted.size() && exhausted[exhausted_floor]) ++exhausted_floor;
            }
        }
        bool jumped = false;
        if (next == npos) {
            // Dead end: restart from any un-visited vertex in the mesh.
            scratch.clear();
            for (std::size_t v = 0; v < n; ++v) {
                if (!visited[v]) scratch.push_back(v);
            }
            next = scratch[rng.uniform_index(scratch.size())];
            jumped = true;
        }
        visited[next] = true;
        walk.vertices.push_back(next);
        walk.jump_flags.push_back(jumped);
        exhausted.push_back(false);
    }
    return walk;
}

Walk generate_walk(const Mesh& mesh, std::size_t start_vertex, std::size_t length, Rng& rng) {
    return generate_walk(MeshGraph(mesh), start_vertex, length, rng);
}

WalkFeatures walk_features(const Mesh& mesh, const Walk& walk) {
    WalkFeatures features(static_cast<Eigen::Index>(walk.size()), 3);
    if (walk.size() == 0) return features;
    features.row(0).setZero();
    for (std::size_t t = 1; t < walk.size(); ++t) {
        const Vec3 delta = mesh.position(walk.vertices[t]) - mesh.position(walk.vertices[t - 1]);
        features.row(static_cast<Eigen::Index>(t)) = delta.transpose();
    }
    return features;
}

}  // namespace strider
