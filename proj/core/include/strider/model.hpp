#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "strider/layers.hpp"
#include "strider/rng.hpp"
#include "strider/walker.hpp"

namespace strider {

enum class TaskKind { classification, segmentation };

const char* to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

/// Layer widths of the walk network:
///   FC(input->fc1) IN ReLU FC(fc1->fc2) IN ReLU GRU... FC(->num_classes)
struct ModelConfig {
    TaskKind task = TaskKind::classification;
    std::size_t input_dim = 3;
    std::size_t fc1 = 128;
    std::size_t fc2 = 256;
    std::vector<std::size_t> gru{1024, 1024, 512};
    std::size_t num_classes = 30;
    double norm_eps = 1e-5;

    /// 3 -> 128 -> 256, GRU 1024/1024/512.
    static ModelConfig full(std::size_t num_classes, TaskKind task = TaskKind::classification);
    /// 3 -> 32 -> 64, GRU 128/128/64; trains in minutes on a CPU.
    static ModelConfig tiny(std::size_t num_classes, TaskKind task = TaskKind::classification);

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct NetParams {
    ModelConfig config;
    LinearParams fc1;
    NormParams in1;
    LinearParams fc2;
    NormParams in2;
    std::vector<GRUCellParams> gru;
    LinearParams out;

    /// All tensors zero (including normalization gains); used for gradients.
    static NetParams zeros(const ModelConfig& config);
    /// Glorot-uniform matrices, zero biases, unit gains.
    static NetParams initialize(const ModelConfig& config, Rng& rng);

    NetParams zeros_like() const { return zeros(config); }
    void set_zero();

    /// Fixed traversal order shared by the optimizer and checkpoints.
    std::vector<Tensor*> tensors();
    std::vector<const Tensor*> tensors() const;
    std::vector<std::string> tensor_names() const;

    /// this += other, tensor by tensor.
    void accumulate(const NetParams& other);
    void scale(double factor);
    bool all_finite() const;
};

std::size_t param_count(const NetParams& params);
std::size_t param_count(const ModelConfig& config);

/// One row of class scores per walk step.
using StepLogits = Matrix;

/// Activations retained for the backward pass of a batch of walks.
struct ForwardCache {
    PackedLayout layout;
    Matrix input;
    Matrix fc1_out;
    InstanceNormCache in1;
    Matrix act1;
    Matrix fc2_out;
    InstanceNormCache in2;
    Matrix act2;
    std::vector<GRUCache> gru;
    Matrix rnn_out;
    Matrix logits;  ///< packed (rows x num_classes)

    StepLogits walk_logits(std::size_t walk) const { return layout.unpack(logits, walk); }
};

/// Runs a batch of walks; every walk is independent of the others.
ForwardCache forward_batch(const NetParams& params, std::span<const WalkFeatures> walks);
/// dlogits is packed like cache.logits; accumulates into grads.
void backward_batch(const NetParams& params, const ForwardCache& cache, const Matrix& dlogits, NetParams& grads);

StepLogits forward(const WalkFeatures& features, const NetParams& params);

struct LossResult {
    double loss = 0.0;
    Matrix grad;  ///< dL/dlogits, same shape as the logits
};

/// Softmax cross-entropy on the final step only.
LossResult classification_loss(const StepLogits& logits, int class_id);

/// First step index that counts toward the segmentation loss: ceil(L/2).
std::size_t second_half_begin(std::size_t walk_length);

/// Mean softmax cross-entropy over steps t >= ceil(L/2), each against the
/// segment of the vertex visited at that step.
LossResult segmentation_loss(const StepLogits& logits, const Walk& walk, std::span<const int> vertex_segments);

}  // namespace strider
