#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "strider/dataset.hpp"
#include "strider/model.hpp"
#include "strider/rng.hpp"

namespace strider {

/// Walk length for a mesh: ceil(V / 2.5) by default, or ceil(fraction * V)
/// when a fraction is given; always within [1, V].
std::size_t walk_length_for(std::size_t vertex_count, std::optional<double> fraction);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(const Eigen::Ref<const RowVector>& scores);

// ---------------------------------------------------------------------------
// Classification

struct ClassifyOptions {
    std::size_t n_walks = 32;
    std::optional<double> walk_length_fraction;
};

struct WalkRecord {
    std::size_t start_vertex = 0;
    std::size_t length = 0;
    RowVector final_probabilities;
    /// Softmax of every step; row t is the prediction after t+1 vertices.
    Matrix step_probabilities;
};

struct ClassifyResult {
    RowVector probabilities;  ///< mean of the walks' final-step softmax
    std::size_t predicted = 0;
    std::vector<WalkRecord> walks;
};

/// Walk i is seeded from the i-th draw of `rng`, so the same rng state on a
/// rotated copy of the mesh reproduces the same walks.
ClassifyResult classify(const Mesh& mesh, const NetParams& params, Rng& rng, const ClassifyOptions& options = {});

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentOptions {
    /// 0 selects 32 x number of segment classes.
    std::size_t n_walks = 0;
    std::optional<double> walk_length_fraction;
};

struct SegmentResult {
    std::vector<int> labels;
    Matrix accumulated;  ///< (V x C) sum of second-half softmax outputs per vertex
    Matrix scores;       ///< (V x C) accumulated plus the half-weighted ring average
    std::vector<std::size_t> visits;
    /// Per-vertex score of the winning label (0 for unresolved vertices).
    std::vector<double> confidence;
    /// Vertices with no evidence in themselves or their ring; they take the
    /// majority label of the others.
    std::size_t unresolved = 0;
};

/// Ring-smoothed vertex labels from accumulated softmax sums:
///   label(v) = argmax( P_v + 1/(2 N_v) * sum_{u in ring(v)} P_u ).
SegmentResult aggregate_segmentation(const Mesh& mesh, Matrix accumulated, std::vector<std::size_t> visits);

SegmentResult segment(const Mesh& mesh, const NetParams& params, Rng& rng, const SegmentOptions& options = {});

/// Ground-truth label per mesh edge (mesh.edges() order) from vertex labels:
/// the shared label if both endpoints agree, otherwise the smaller id.
std::vector<int> ground_truth_edge_labels(const Mesh& mesh, std::span<const int> vertex_labels);

/// Length-weighted fraction of correctly labeled edges. An edge takes its
/// endpoints' label when they agree, otherwise the label of the endpoint with
/// the higher score (ties to the smaller label).
double edge_accuracy(const Mesh& mesh, std::span<const int> predicted, std::span<const double> confidence,
                     std::span<const int> truth_edge_labels);

// ---------------------------------------------------------------------------
// Dataset-level evaluation

struct EvalOptions {
    std::size_t n_walks = 32;  ///< classification; segmentation uses SegmentOptions default when 0
    std::size_t seg_walks = 0;
    std::optional<double> walk_length_fraction;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    /// Applied to each test mesh before inference (rotation robustness study).
    std::optional<Mat3> rotation;
};

struct MeshEvaluation {
    std::string name;
    int truth = -1;        ///< class id (classification)
    int predicted = -1;    ///< class id (classification)
    double accuracy = 0.0; ///< 1/0 for classification, edge accuracy for segmentation
    RowVector probabilities;
    std::vector<int> vertex_labels;
};

struct EvalResult {
    double accuracy = 0.0;  ///< mean over meshes
    std::vector<MeshEvaluation> meshes;
};

/// Mesh i of `samples` uses Rng::stream(seed, i), independent of threads.
EvalResult evaluate(std::span<const Sample* const> samples, const NetParams& params, const EvalOptions& options);
EvalResult evaluate(const Dataset& dataset, Split split, const NetParams& params, const EvalOptions& options);

}  // namespace strider
