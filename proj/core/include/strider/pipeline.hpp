#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "strider/checkpoint.hpp"
#include "strider/dataset.hpp"
#include "strider/inference.hpp"
#include "strider/model.hpp"
#include "strider/optim.hpp"

namespace strider {

// ---------------------------------------------------------------------------
// Preprocessing

/// Simplifies to `target_faces` (0 keeps the mesh as is) and normalizes into
/// the unit sphere; segment labels follow the surviving vertices.
Sample preprocess_sample(const Sample& sample, std::size_t target_faces);

/// One output sample per (input sample, target), tagged "f<target>".
Dataset preprocess_dataset(const Dataset& dataset, const std::vector<std::size_t>& targets);

/// Moves a `fraction` of the vertices toward a random 1-ring neighbor by a
/// uniform factor in (0, 0.5]; connectivity is unchanged.
Mesh perturb_triangulation(const Mesh& mesh, double fraction, Rng& rng);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    TaskKind task = TaskKind::classification;
    /// Unset: ceil(V / 2.5).
    std::optional<double> walk_length_fraction;
    std::size_t meshes_per_batch = 32;
    std::size_t walks_per_mesh = 1;
    /// Total iteration count; a resumed run stops here too.
    std::size_t iterations = 1000;
    CyclicSchedule schedule;
    std::uint64_t seed = 0;
    bool rotate = true;
    std::size_t threads = 1;
    /// Evaluate on the test split every this many iterations (0: never).
    std::size_t eval_every = 0;
    EvalOptions eval;

    /// 32 walks from distinct meshes.
    static TrainConfig classification_defaults();
    /// 4 walks on each of 8 meshes.
    static TrainConfig segmentation_defaults();

    std::size_t batch_walks() const { return meshes_per_batch * walks_per_mesh; }
    void validate() const;
};

struct MetricsRow {
    std::uint64_t iteration = 0;
    double loss = 0.0;
    double rate = 0.0;
    std::optional<double> eval_accuracy;
};

/// Append-only CSV: iteration,loss,rate,eval_accuracy
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<MetricsRow> metrics;
};

using TrainObserver = std::function<void(const MetricsRow&)>;

/// Trains from freshly initialized parameters (seeded by config.seed), or
/// resumes from `resume` when given. Bitwise reproducible for a fixed seed and
/// thread count.
TrainResult train(const Dataset& dataset, const ModelConfig& model, const TrainConfig& config,
                  const TrainObserver& observer = {}, const Checkpoint* resume = nullptr);

/// One optimizer step on an explicit batch; exposed for tests and benchmarks.
struct BatchItem {
    WalkFeatures features;
    Walk walk;
    const MeshLabels* labels = nullptr;
};
double train_step(NetParams& params, AdamState& adam, std::span<const BatchItem> batch, double rate, std::size_t threads);

/// Mean loss and gradient (accumulated into `grads`) over a batch.
double batch_loss_and_gradient(const NetParams& params, std::span<const BatchItem> batch, NetParams& grads,
                               std::size_t threads);

// ---------------------------------------------------------------------------
// Ablation sweeps

enum class SweepAxis { walk_length, n_walks, train_size };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepPoint {
    double value = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_seed;
};

struct SweepOptions {
    SweepAxis axis = SweepAxis::n_walks;
    /// walk_length: fractions of V; n_walks: counts; train_size: fractions
    /// of the training split.
    std::vector<double> values;
    std::size_t seeds = 3;
    std::uint64_t base_seed = 0;
    EvalOptions eval;
    /// Only used by the train_size axis.
    std::optional<ModelConfig> model;
    std::optional<TrainConfig> train;
};

/// Accuracy on the test split at each grid value, mean and sample standard
/// deviation over `seeds` evaluation (or training) seeds.
std::vector<SweepPoint> ablation_sweep(const Dataset& dataset, const NetParams* params, const SweepOptions& options);

/// Header `<axis>,mean_accuracy,std_accuracy` and one row per point.
std::string sweep_csv(const std::vector<SweepPoint>& points, SweepAxis axis);

}  // namespace strider
