#include "strider/inference.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "strider/errors.hpp"
#include "strider/parallel.hpp"
#include "strider/walker.hpp"

namespace strider {

std::size_t walk_length_for(std::size_t vertex_count, std::optional<double> fraction) {
    if (vertex_count == 0) throw std::invalid_argument("walk_length_for: empty mesh");
    if (!fraction) return default_walk_length(vertex_count);
    if (!(*fraction > 0.0)) throw std::invalid_argument("walk_length_for: fraction must be positive");
    const auto len = static_cast<std::size_t>(std::ceil(*fraction * static_cast<double>(vertex_count) - 1e-9));
    return std::clamp<std::size_t>(len, 1, vertex_count);
}

std::size_t argmax(const Eigen::Ref<const RowVector>& scores) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores(i) > scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    }
    return best;
}

namespace {

struct WalkBatch {
    std::vector<Walk> walks;
    std::vector<WalkFeatures> features;
};

WalkBatch make_walks(const Mesh& mesh, std::size_t n_walks, std::size_t length, Rng& rng) {
    WalkBatch batch;
    batch.walks.reserve(n_walks);
    batch.features.reserve(n_walks);
    for (std::size_t i = 0; i < n_walks; ++i) {
        Rng walk_rng(rng.next_u64());
        const std::size_t start = walk_rng.uniform_index(mesh.vertex_count());
        batch.walks.push_back(generate_walk(mesh, start, length, walk_rng));
        batch.features.push_back(walk_features(mesh, batch.walks.back()));
    }
    return batch;
}

Matrix row_softmax(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) out.row(r) = softmax(logits.row(r));
    return out;
}

}  // namespace

ClassifyResult classify(const Mesh& mesh, const NetParams& params, Rng& rng, const ClassifyOptions& options) {
    if (options.n_walks == 0) throw std::invalid_argument("classify: n_walks must be positive");
    if (mesh.vertex_count() == 0) throw DataError("classify: empty mesh");
    const std::size_t length = walk_length_for(mesh.vertex_count(), options.walk_length_fraction);
    const WalkBatch batch = make_walks(mesh, options.n_walks, length, rng);
    const ForwardCache cache = forward_batch(params, batch.features);

    ClassifyResult result;
    result.probabilities = RowVector::Zero(static_cast<Eigen::Index>(params.config.num_classes));
    for (std::size_t i = 0; i < batch.walks.size(); ++i) {
        WalkRecord rec;
        rec.start_vertex = batch.walks[i].start_vertex();
        rec.length = batch.walks[i].size();
        rec.step_probabilities = row_softmax(cache.walk_logits(i));
        rec.final_probabilities = rec.step_probabilities.bottomRows(1);
        result.probabilities += rec.final_probabilities;
        result.walks.push_back(std::move(rec));
    }
    result.probabilities /= static_cast<double>(batch.walks.size());
    result.predicted = argmax(result.probabilities);
    return result;
}

SegmentResult aggregate_segmentation(const Mesh& mesh, Matrix accumulated, std::vector<std::size_t> visits) {
    const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
    if (accumulated.rows() != n) throw ShapeError("aggregate_segmentation: one accumulator row per vertex required");
    SegmentResult result;
    result.scores = accumulated;
    for (Eigen::Index v = 0; v < n; ++v) {
        const auto ring = mesh.neighbors(static_cast<std::size_t>(v));
        if (ring.empty()) continue;
        RowVector ring_sum = RowVector::Zero(accumulated.cols());
        for (std::size_t u : ring) ring_sum += accumulated.row(static_cast<Eigen::Index>(u));
        result.scores.row(v) += ring_sum / (2.0 * static_cast<double>(ring.size()));
    }

    result.labels.assign(mesh.vertex_count(), -1);
    result.confidence.assign(mesh.vertex_count(), 0.0);
    std::vector<std::size_t> votes(static_cast<std::size_t>(accumulated.cols()), 0);
    for (Eigen::Index v = 0; v < n; ++v) {
        if (!(result.scores.row(v).sum() > 0.0)) continue;
        const std::size_t label = argmax(result.scores.row(v));
        result.labels[static_cast<std::size_t>(v)] = static_cast<int>(label);
        result.confidence[static_cast<std::size_t>(v)] = result.scores(v, static_cast<Eigen::Index>(label));
        ++votes[label];
    }
    const int majority = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    for (int& label : result.labels) {
        if (label < 0) {
            label = majority;
            ++result.unresolved;
        }
    }
    result.accumulated = std::move(accumulated);
    result.visits = std::move(visits);
    return result;
}

SegmentResult segment(const Mesh& mesh, const NetParams& params, Rng& rng, const SegmentOptions& options) {
    if (mesh.vertex_count() == 0) throw DataError("segment: empty mesh");
    const std::size_t classes = params.config.num_classes;
    const std::size_t n_walks = options.n_walks ? options.n_walks : 32 * classes;
    const std::size_t length = walk_length_for(mesh.vertex_count(), options.walk_length_fraction);
    const WalkBatch batch = make_walks(mesh, n_walks, length, rng);
    const ForwardCache cache = forward_batch(params, batch.features);

    Matrix accumulated = Matrix::Zero(static_cast<Eigen::Index>(mesh.vertex_count()), static_cast<Eigen::Index>(classes));
    std::vector<std::size_t> visits(mesh.vertex_count(), 0);
    for (std::size_t i = 0; i < batch.walks.size(); ++i) {
        const Walk& walk = batch.walks[i];
        for (std::size_t t = second_half_begin(walk.size()); t < walk.size(); ++t) {
            const auto row = static_cast<Eigen::Index>(cache.layout.row(i, t));
            const std::size_t v = walk.vertices[t];
            accumulated.row(static_cast<Eigen::Index>(v)) += softmax(cache.logits.row(row));
            ++visits[v];
        }
    }
    SegmentResult result = aggregate_segmentation(mesh, std::move(accumulated), std::move(visits));
    if (result.unresolved > 0) {
        std::cerr << "warning: " << result.unresolved
                  << " vertices received no walk predictions; assigned the majority label\n";
    }
    return result;
}

std::vector<int> ground_truth_edge_labels(const Mesh& mesh, std::span<const int> vertex_labels) {
    if (vertex_labels.size() != mesh.vertex_count()) throw ShapeError("ground_truth_edge_labels: one label per vertex required");
    std::vector<int> out;
    out.reserve(mesh.edge_count());
    for (const Edge& e : mesh.edges()) out.push_back(std::min(vertex_labels[e.a], vertex_labels[e.b]));
    return out;
}

double edge_accuracy(const Mesh& mesh, std::span<const int> predicted, std::span<const double> confidence,
                     std::span<const int> truth_edge_labels) {
    if (predicted.size() != mesh.vertex_count() || confidence.size() != mesh.vertex_count()) {
        throw ShapeError("edge_accuracy: one prediction and confidence per vertex required");
    }
    if (truth_edge_labels.size() != mesh.edge_count()) throw ShapeError("edge_accuracy: one truth label per edge required");
    double correct = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < mesh.edge_count(); ++i) {
        const Edge& e = mesh.edges()[i];
        // The more confident endpoint decides; ties fall to the smaller label as in the ground truth.
        int label = std::min(predicted[e.a], predicted[e.b]);
        if (confidence[e.a] > confidence[e.b]) label = predicted[e.a];
        if (confidence[e.b] > confidence[e.a]) label = predicted[e.b];
        total += e.length;
        if (label == truth_edge_labels[i]) correct += e.length;
    }
    if (total <= 0.0) return 0.0;
    return correct / total;
}

EvalResult evaluate(std::span<const Sample* const> samples, const NetParams& params, const EvalOptions& options) {
    EvalResult result;
    result.meshes.resize(samples.size());
    parallel_for(samples.size(), options.threads, [&](std::size_t i) {
        const Sample& s = *samples[i];
        const Mesh mesh = options.rotation ? rotate(s.mesh, *options.rotation) : s.mesh;
        Rng rng = Rng::stream(options.seed, i);
        MeshEvaluation& ev = result.meshes[i];
        ev.name = s.name;
        if (params.config.task == TaskKind::classification) {
            if (!s.labels.class_id) throw DataError("evaluate: sample '" + s.name + "' lacks a class label");
            const ClassifyResult cr = classify(mesh, params, rng, {options.n_walks, options.walk_length_fraction});
            ev.truth = *s.labels.class_id;
            ev.predicted = static_cast<int>(cr.predicted);
            ev.accuracy = ev.truth == ev.predicted ? 1.0 : 0.0;
            ev.probabilities = cr.probabilities;
        } else {
            if (!s.labels.is_segmentation()) throw DataError("evaluate: sample '" + s.name + "' lacks segment labels");
            const SegmentResult sr = segment(mesh, params, rng, {options.seg_walks, options.walk_length_fraction});
            const auto truth = ground_truth_edge_labels(mesh, s.labels.vertex_segments);
            ev.accuracy = edge_accuracy(mesh, sr.labels, sr.confidence, truth);
            ev.vertex_labels = sr.labels;
        }
    });
    double sum = 0.0;
    for (const auto& m : result.meshes) sum += m.accuracy;
    result.accuracy = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
    return result;
}

EvalResult evaluate(const Dataset& dataset, Split split, const NetParams& params, const EvalOptions& options) {
    const auto samples = dataset.split(split);
    return evaluate(samples, params, options);
}

}  // namespace strider
