#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strider/rng.hpp"

namespace strider {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::size_t, 3>;

struct Edge {
    std::size_t a = 0;  ///< smaller endpoint
    std::size_t b = 0;  ///< larger endpoint
    double length = 0.0;
};

/// Triangle mesh with derived adjacency and a unique edge list.
///
/// Constructed once and then treated as an immutable value; every
/// constructor validates face indices and rebuilds the derived data.
/// Vertices referenced by no face are kept and have empty adjacency.
class Mesh {
public:
    Mesh() = default;
    Mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t face_count() const noexcept { return faces_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Vec3& position(std::size_t v) const { return vertices_[v]; }

    /// Sorted ascending neighbor list of v.
    std::span<const std::size_t> neighbors(std::size_t v) const {
        return {adjacency_.data() + adjacency_offsets_[v], adjacency_offsets_[v + 1] - adjacency_offsets_[v]};
    }
    bool adjacent(std::size_t u, std::size_t v) const;

    /// Same connectivity, new positions (size must match).
    Mesh with_positions(std::vector<Vec3> positions) const;

    double mean_edge_length() const;

    /// Stable content hash over positions and faces.
    std::uint64_t content_hash() const;

private:
    void build_derived();

    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<std::size_t> adjacency_;
    std::vector<std::size_t> adjacency_offsets_{0};
    std::vector<Edge> edges_;
};

/// Either a mesh-level class id or per-vertex segment ids.
struct MeshLabels {
    std::optional<int> class_id;
    std::vector<int> vertex_segments;

    static MeshLabels classification(int id) { return MeshLabels{id, {}}; }
    static MeshLabels segmentation(std::vector<int> segments) { return MeshLabels{std::nullopt, std::move(segments)}; }

    bool is_segmentation() const noexcept { return !class_id.has_value(); }
    /// Throws DataError unless every id is in [0, num_classes) and, for
    /// segmentation, there is one id per vertex.
    void validate(int num_classes, std::size_t vertex_count) const;
};

enum class MeshFormat { off, obj };

MeshFormat format_from_path(const std::filesystem::path& path);

Mesh load_mesh(const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path, MeshFormat format);
/// Parses mesh text; `source_name` only appears in error messages.
Mesh parse_mesh(const std::string& text, MeshFormat format, const std::string& source_name = "<memory>");

/// OFF writer; coordinates use 9 significant digits at minimum.
void save_off(const Mesh& mesh, const std::filesystem::path& path, int precision = 9);
std::string to_off_string(const Mesh& mesh, int precision = 9);

MeshLabels load_labels(const std::filesystem::path& path);
void save_labels(const MeshLabels& labels, const std::filesystem::path& path);

/// Centroid to the origin, farthest vertex at distance 1.
Mesh normalize_unit_sphere(const Mesh& mesh);

/// Rz(gamma) * Ry(beta) * Rx(alpha).
Mat3 euler_rotation(double alpha, double beta, double gamma);
/// Euler angles drawn independently and uniformly from [0, 2*pi).
Mat3 random_rotation_matrix(Rng& rng);
Mesh rotate(const Mesh& mesh, const Mat3& rotation);
Mesh random_rotation(const Mesh& mesh, Rng& rng);

/// Per-vertex component id; ids are ordered by smallest contained vertex.
std::vector<std::size_t> connected_components(const Mesh& mesh);

}  // namespace strider
