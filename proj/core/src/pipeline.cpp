#include "strider/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "strider/errors.hpp"
#include "strider/parallel.hpp"
#include "strider/simplify.hpp"
#include "strider/walker.hpp"

namespace strider {

// ---------------------------------------------------------------------------
// Preprocessing

Sample preprocess_sample(const Sample& sample, std::size_t target_faces) {
    Sample out = sample;
    if (target_faces > 0 && sample.mesh.face_count() > target_faces) {
        const SimplifyResult simplified = simplify_to_face_count(sample.mesh, target_faces);
        out.mesh = simplified.mesh;
        if (sample.labels.is_segmentation()) {
            out.labels = MeshLabels::segmentation(transfer_vertex_labels(simplified, sample.labels.vertex_segments));
        }
    }
    out.mesh = normalize_unit_sphere(out.mesh);
    out.variant = target_faces > 0 ? "f" + std::to_string(target_faces) : "raw";
    return out;
}

Dataset preprocess_dataset(const Dataset& dataset, const std::vector<std::size_t>& targets) {
    if (targets.empty()) throw std::invalid_argument("preprocess_dataset: no targets");
    Dataset out;
    out.task = dataset.task;
    out.num_classes = dataset.num_classes;
    out.class_names = dataset.class_names;
    for (const Sample& s : dataset.samples) {
        for (std::size_t target : targets) {
            Sample p = preprocess_sample(s, target);
            p.name = s.name + "_" + p.variant;
            out.samples.push_back(std::move(p));
        }
    }
    return out;
}

Mesh perturb_triangulation(const Mesh& mesh, double fraction, Rng& rng) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("perturb_triangulation: fraction must be in [0, 1]");
    const std::size_t n = mesh.vertex_count();
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng.uniform_index(n - i)]);

    std::vector<Vec3> pos = mesh.vertices();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t v = order[i];
        const auto ring = mesh.neighbors(v);
        if (ring.empty()) continue;
        const std::size_t u = ring[rng.uniform_index(ring.size())];
        const double factor = 0.5 * (1.0 - rng.uniform01());  // (0, 0.5]
        pos[v] = mesh.position(v) + factor * (mesh.position(u) - mesh.position(v));
    }
    return mesh.with_positions(std::move(pos));
}

// ---------------------------------------------------------------------------
// Training

TrainConfig TrainConfig::classification_defaults() {
    TrainConfig c;
    c.task = TaskKind::classification;
    c.meshes_per_batch = 32;
    c.walks_per_mesh = 1;
    return c;
}

TrainConfig TrainConfig::segmentation_defaults() {
    TrainConfig c;
    c.task = TaskKind::segmentation;
    c.meshes_per_batch = 8;
    c.walks_per_mesh = 4;
    return c;
}

void TrainConfig::validate() const {
    if (meshes_per_batch == 0 || walks_per_mesh == 0) throw std::invalid_argument("TrainConfig: batch shape must be positive");
    if (threads == 0) throw std::invalid_argument("TrainConfig: threads must be positive");
    if (walk_length_fraction && !(*walk_length_fraction > 0.0)) {
        throw std::invalid_argument("TrainConfig: walk_length_fraction must be positive");
    }
    schedule.validate();
}

std::string metrics_csv_header() { return "iteration,loss,rate,eval_accuracy"; }

std::string metrics_csv_row(const MetricsRow& row) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%llu,%.10g,%.10g,", static_cast<unsigned long long>(row.iteration), row.loss, row.rate);
    std::string out(buf);
    if (row.eval_accuracy) {
        std::snprintf(buf, sizeof(buf), "%.10g", *row.eval_accuracy);
        out += buf;
    }
    return out;
}

double batch_loss_and_gradient(const NetParams& params, std::span<const BatchItem> batch, NetParams& grads,
                               std::size_t threads) {
    if (batch.empty()) throw std::invalid_argument("batch_loss_and_gradient: empty batch");
    const std::size_t chunks = std::clamp<std::size_t>(threads, 1, batch.size());
    const double weight = 1.0 / static_cast<double>(batch.size());
    std::vector<NetParams> chunk_grads(chunks);
    std::vector<double> chunk_loss(chunks, 0.0);

    parallel_for(chunks, chunks, [&](std::size_t c) {
        const std::size_t begin = batch.size() * c / chunks;
        const std::size_t end = batch.size() * (c + 1) / chunks;
        std::vector<WalkFeatures> features;
        features.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) features.push_back(batch[i].features);
        const ForwardCache cache = forward_batch(params, features);
        Matrix dlogits = Matrix::Zero(cache.logits.rows(), cache.logits.cols());
        double loss = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t local = i - begin;
            const StepLogits logits = cache.walk_logits(local);
            const MeshLabels& labels = *batch[i].labels;
            const LossResult lr = labels.is_segmentation()
                                      ? segmentation_loss(logits, batch[i].walk, labels.vertex_segments)
                                      : classification_loss(logits, *labels.class_id);
            loss += lr.loss;
            for (std::size_t t = 0; t < cache.layout.length(local); ++t) {
                dlogits.row(static_cast<Eigen::Index>(cache.layout.row(local, t))) =
                    weight * lr.grad.row(static_cast<Eigen::Index>(t));
            }
        }
        chunk_grads[c] = params.zeros_like();
        backward_batch(params, cache, dlogits, chunk_grads[c]);
        chunk_loss[c] = loss;
    });

    double loss = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        grads.accumulate(chunk_grads[c]);
        loss += chunk_loss[c];
    }
    if (!grads.all_finite()) throw NumericalError("non-finite parameter gradient");
    return loss * weight;
}

double train_step(NetParams& params, AdamState& adam, std::span<const BatchItem> batch, double rate, std::size_t threads) {
    NetParams grads = params.zeros_like();
    const double loss = batch_loss_and_gradient(params, batch, grads, threads);
    if (!std::isfinite(loss)) throw NumericalError("non-finite training loss");
    auto p = params.tensors();
    const auto g = std::as_const(grads).tensors();
    adam_step(p, g, adam, rate);
    return loss;
}

namespace {

/// Salts separating the RNG streams used during training.
enum StreamSalt : std::uint64_t { init_stream = 0x1001, pick_stream = 0x2002, rotate_stream = 0x3003, walk_stream = 0x4004 };

std::vector<std::size_t> pick_meshes(std::size_t available, std::size_t wanted, Rng& rng) {
    std::vector<std::size_t> out;
    out.reserve(wanted);
    if (available >= wanted) {
        // Distinct meshes: partial Fisher-Yates.
        std::vector<std::size_t> pool(available);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < wanted; ++i) {
            std::swap(pool[i], pool[i + rng.uniform_index(available - i)]);
            out.push_back(pool[i]);
        }
    } else {
        for (std::size_t i = 0; i < wanted; ++i) out.push_back(rng.uniform_index(available));
    }
    return out;
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& model, const TrainConfig& config, const TrainObserver& observer,
                  const Checkpoint* resume) {
    config.validate();
    dataset.validate();
    if (dataset.task != config.task || model.task != config.task) {
        throw DataError(std::string("task mismatch: dataset is ") + to_string(dataset.task) + ", training config is " +
                        to_string(config.task) + ", model is " + to_string(model.task));
    }
    if (model.num_classes != static_cast<std::size_t>(dataset.num_classes)) {
        throw DataError("model class count " + std::to_string(model.num_classes) + " does not match dataset class count " +
                        std::to_string(dataset.num_classes));
    }
    const auto train_samples = dataset.split(Split::train);
    const auto test_samples = dataset.split(Split::test);
    if (train_samples.empty()) throw DataError("training split is empty");

    TrainResult result;
    Checkpoint& ck = result.checkpoint;
    if (resume) {
        if (!(resume->params.config == model)) throw DataError("resume checkpoint has a different model config");
        ck = *resume;
    } else {
        Rng init = Rng::stream(config.seed, init_stream);
        ck.params = NetParams::initialize(model, init);
        ck.iteration = 0;
    }
    if (ck.adam.first_moment.empty()) {
        ck.adam = AdamState::for_params(std::as_const(ck.params).tensors());
    }

    std::vector<BatchItem> batch(config.batch_walks());
    for (std::uint64_t it = ck.iteration; it < config.iterations; ++it) {
        const double rate = cyclic_rate(it, config.schedule);
        Rng pick = Rng::stream(config.seed, pick_stream, it);
        const auto chosen = pick_meshes(train_samples.size(), config.meshes_per_batch, pick);
        for (std::size_t m = 0; m < chosen.size(); ++m) {
            const Sample& s = *train_samples[chosen[m]];
            Mat3 rotation = Mat3::Identity();
            if (config.rotate) {
                Rng rot = Rng::stream(config.seed, rotate_stream ^ (it << 16), m);
                rotation = random_rotation_matrix(rot);
            }
            const std::size_t length = walk_length_for(s.mesh.vertex_count(), config.walk_length_fraction);
            for (std::size_t w = 0; w < config.walks_per_mesh; ++w) {
                BatchItem& item = batch[m * config.walks_per_mesh + w];
                Rng wr = Rng::stream(config.seed ^ walk_stream, chosen[m], m * config.walks_per_mesh + w, it);
                const std::size_t start = wr.uniform_index(s.mesh.vertex_count());
                item.walk = generate_walk(s.mesh, start, length, wr);
                // Rotating the deltas equals walking the rotated mesh.
                item.features = walk_features(s.mesh, item.walk) * rotation.transpose();
                item.labels = &s.labels;
            }
        }

        double loss = 0.0;
        try {
            loss = train_step(ck.params, ck.adam, batch, rate, config.threads);
        } catch (const NumericalError& e) {
            throw NumericalError("iteration " + std::to_string(it) + ": " + e.what() + " (rate " + std::to_string(rate) + ")");
        }
        ck.iteration = it + 1;

        MetricsRow row{it, loss, rate, std::nullopt};
        if (config.eval_every > 0 && (it + 1) % config.eval_every == 0 && !test_samples.empty()) {
            EvalOptions eval = config.eval;
            eval.threads = config.threads;
            row.eval_accuracy = evaluate(test_samples, ck.params, eval).accuracy;
        }
        result.metrics.push_back(row);
        if (observer) observer(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Ablation sweeps

const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::walk_length: return "walk_length";
        case SweepAxis::n_walks: return "n_walks";
        case SweepAxis::train_size: return "train_size";
    }
    return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "walk_length") return SweepAxis::walk_length;
    if (name == "n_walks") return SweepAxis::n_walks;
    if (name == "train_size") return SweepAxis::train_size;
    throw std::invalid_argument("unknown sweep axis '" + name + "' (expected walk_length, n_walks or train_size)");
}

namespace {

Dataset subsample_train(const Dataset& dataset, double fraction, std::uint64_t seed) {
    Dataset out;
    out.task = dataset.task;
    out.num_classes = dataset.num_classes;
    out.class_names = dataset.class_names;
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].split == Split::train) {
            train_idx.push_back(i);
        } else {
            out.samples.push_back(dataset.samples[i]);
        }
    }
    Rng rng = Rng::stream(seed, 0x5005);
    for (std::size_t i = train_idx.size(); i > 1; --i) std::swap(train_idx[i - 1], train_idx[rng.uniform_index(i)]);
    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(train_idx.size()) - 1e-9)), 1, train_idx.size());
    std::sort(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(keep));
    for (std::size_t k = 0; k < keep; ++k) out.samples.push_back(dataset.samples[train_idx[k]]);
    return out;
}

}  // namespace

std::vector<SweepPoint> ablation_sweep(const Dataset& dataset, const NetParams* params, const SweepOptions& options) {
    if (options.values.empty()) throw std::invalid_argument("ablation_sweep: empty grid");
    if (options.seeds == 0) throw std::invalid_argument("ablation_sweep: need at least one seed");
    if (options.axis != SweepAxis::train_size && params == nullptr) {
        throw std::invalid_argument("ablation_sweep: trained parameters required for this axis");
    }
    if (options.axis == SweepAxis::train_size && (!options.model || !options.train)) {
        throw std::invalid_argument("ablation_sweep: train_size axis needs model and training configs");
    }
    std::vector<SweepPoint> points;
    for (double value : options.values) {
        SweepPoint point;
        point.value = value;
        for (std::size_t s = 0; s < options.seeds; ++s) {
            const std::uint64_t seed = options.base_seed + s;
            EvalOptions eval = options.eval;
            eval.seed = seed;
            double acc = 0.0;
            switch (options.axis) {
                case SweepAxis::n_walks: {
                    if (!(value >= 1.0)) throw std::invalid_argument("ablation_sweep: n_walks values must be >= 1");
                    eval.n_walks = static_cast<std::size_t>(value);
                    eval.seg_walks = static_cast<std::size_t>(value);
                    acc = evaluate(dataset, Split::test, *params, eval).accuracy;
                    break;
                }
                case SweepAxis::walk_length: {
                    eval.walk_length_fraction = value;
                    acc = evaluate(dataset, Split::test, *params, eval).accuracy;
                    break;
                }
                case SweepAxis::train_size: {
                    if (!(value > 0.0 && value <= 1.0)) throw std::invalid_argument("ablation_sweep: train_size values must be in (0, 1]");
                    const Dataset subset = subsample_train(dataset, value, seed);
                    TrainConfig tc = *options.train;
                    tc.seed = seed;
                    const TrainResult trained = train(subset, *options.model, tc);
                    acc = evaluate(subset, Split::test, trained.checkpoint.params, eval).accuracy;
                    break;
                }
            }
            point.per_seed.push_back(acc);
        }
        const double n = static_cast<double>(point.per_seed.size());
        point.mean = std::accumulate(point.per_seed.begin(), point.per_seed.end(), 0.0) / n;
        double ss = 0.0;
        for (double a : point.per_seed) ss += (a - point.mean) * (a - point.mean);
        point.stddev = point.per_seed.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        points.push_back(std::move(point));
    }
    return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, SweepAxis axis) {
    std::ostringstream out;
    out << to_string(axis) << ",mean_accuracy,std_accuracy\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", p.value, p.mean, p.stddev);
        out << buf;
    }
    return out.str();
}

}  // namespace strider
