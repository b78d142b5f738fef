#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "strider/mesh.hpp"
#include "strider/model.hpp"

namespace strider {

enum class Split { train, test };

const char* to_string(Split split);
Split split_from_string(const std::string& name);

struct Sample {
    std::string name;
    Mesh mesh;
    MeshLabels labels;
    Split split = Split::train;
    /// Preprocessing variant tag, e.g. "raw" or "f300" (simplified to 300 faces).
    std::string variant = "raw";
};

/// In-memory labeled mesh collection.
///
/// On disk a dataset is a directory holding `manifest.txt` plus the files it
/// references (paths relative to the manifest):
///
///     strider-manifest 1
///     task classification
///     classes 3 sphere box torus
///     sample train f300 meshes/sphere_000_f300.off labels/sphere_000_f300.txt
///
/// `classes` lists the class count optionally followed by one name per class.
/// Label sidecars hold either `class <id>` or one segment id per vertex line.
struct Dataset {
    TaskKind task = TaskKind::classification;
    int num_classes = 0;
    std::vector<std::string> class_names;
    std::vector<Sample> samples;

    std::vector<const Sample*> split(Split which) const;
    std::size_t count(Split which) const;
    /// Throws DataError on label/task inconsistencies.
    void validate() const;
};

inline constexpr const char* manifest_filename = "manifest.txt";

/// Writes meshes (OFF), label sidecars and the manifest under `dir`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
/// Accepts either the manifest file or the directory containing it.
Dataset load_dataset(const std::filesystem::path& manifest_or_dir);

}  // namespace strider
