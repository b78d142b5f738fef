#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strider/dataset.hpp"
#include "strider/mesh.hpp"

namespace strider {

enum class ShapeFamily { icosphere, box, torus, cylinder, dumbbell };

const char* to_string(ShapeFamily family);
ShapeFamily family_from_string(const std::string& name);

/// Parameters of one procedural shape. Each family reads only its own fields.
struct ShapeSpec {
    ShapeFamily family = ShapeFamily::icosphere;

    /// icosphere: per-axis radii; box: edge lengths.
    Vec3 extents = Vec3::Ones();
    /// icosphere: refinement level (0 is the icosahedron).
    std::size_t subdivisions = 2;
    /// box: grid cells along each edge.
    std::size_t box_cells = 1;

    /// torus: major radius and tube radius over major radius.
    double radius = 1.0;
    double tube_ratio = 0.35;
    /// torus, cylinder and dumbbell: segments around the axis, and along the
    /// tube (torus) or the profile (cylinder, dumbbell).
    std::size_t around = 16;
    std::size_t along = 8;

    /// cylinder: height over radius. dumbbell: handle length over bulb A radius.
    double aspect = 2.0;
    /// dumbbell: bulb B radius and handle radius, both relative to bulb A.
    double bulb_ratio = 0.7;
    double handle_ratio = 0.35;

    /// Vertex displacement as a fraction of the mean edge length, in [0, 0.5].
    /// Random vertex offset, as a fraction of each vertex's shortest incident edge.
    double jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Dumbbell segment ids.
enum DumbbellPart : int { bulb_a = 0, handle = 1, bulb_b = 2 };

struct GeneratedShape {
    Mesh mesh;
    /// Per-vertex segment ids (dumbbell only).
    std::optional<std::vector<int>> segments;
};

/// Closed, consistently outward-oriented triangle mesh; deterministic in spec.
GeneratedShape generate_shape(const ShapeSpec& spec);

struct DatasetSpec {
    std::vector<ShapeFamily> families;
    /// Classification: one class per family. Segmentation: dumbbell only, with
    /// the three dumbbell parts as classes.
    TaskKind task = TaskKind::classification;
    std::size_t per_class = 20;
    double jitter = 0.1;
    std::uint64_t seed = 0;
    /// Simplification target after generation (0 keeps the generated mesh).
    std::size_t target_faces = 300;

    void validate() const;
};

/// Randomized instances per family, normalized into the unit sphere. Each
/// family is split ceil(0.8 n) train / rest test by a seeded shuffle.
Dataset generate_dataset(const DatasetSpec& spec);

/// Spec for instance `index` of `family`, as drawn by generate_dataset.
ShapeSpec random_instance(ShapeFamily family, std::size_t index, double jitter, std::uint64_t seed);

}  // namespace strider
