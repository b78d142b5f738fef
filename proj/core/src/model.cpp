#include "strider/model.hpp"

#include <stdexcept>

#include "strider/errors.hpp"

namespace strider {

const char* to_string(TaskKind task) {
    return task == TaskKind::classification ? "classification" : "segmentation";
}

TaskKind task_from_string(const std::string& name) {
    if (name == "classification") return TaskKind::classification;
    if (name == "segmentation") return TaskKind::segmentation;
    throw std::invalid_argument("unknown task '" + name + "' (expected classification or segmentation)");
}

ModelConfig ModelConfig::full(std::size_t num_classes, TaskKind task) {
    ModelConfig c;
    c.task = task;
    c.num_classes = num_classes;
    return c;
}

ModelConfig ModelConfig::tiny(std::size_t num_classes, TaskKind task) {
    ModelConfig c;
    c.task = task;
    c.fc1 = 32;
    c.fc2 = 64;
    c.gru = {128, 128, 64};
    c.num_classes = num_classes;
    return c;
}

void ModelConfig::validate() const {
    if (input_dim == 0 || fc1 == 0 || fc2 == 0) throw std::invalid_argument("ModelConfig: layer widths must be positive");
    if (gru.empty()) throw std::invalid_argument("ModelConfig: at least one GRU layer is required");
    for (std::size_t h : gru) {
        if (h == 0) throw std::invalid_argument("ModelConfig: GRU widths must be positive");
    }
    if (num_classes < 2) throw std::invalid_argument("ModelConfig: need at least 2 classes");
    if (!(norm_eps > 0.0)) throw std::invalid_argument("ModelConfig: norm_eps must be positive");
}

// ---------------------------------------------------------------------------

NetParams NetParams::zeros(const ModelConfig& config) {
    config.validate();
    NetParams p;
    p.config = config;
    p.fc1 = LinearParams::zeros(config.input_dim, config.fc1);
    p.in1 = NormParams::zeros(config.fc1);
    p.fc2 = LinearParams::zeros(config.fc1, config.fc2);
    p.in2 = NormParams::zeros(config.fc2);
    std::size_t in = config.fc2;
    for (std::size_t h : config.gru) {
        p.gru.push_back(GRUCellParams::zeros(in, h));
        in = h;
    }
    p.out = LinearParams::zeros(in, config.num_classes);
    return p;
}

NetParams NetParams::initialize(const ModelConfig& config, Rng& rng) {
    NetParams p = zeros(config);
    glorot_uniform(p.fc1, rng);
    p.in1 = NormParams::identity(config.fc1);
    glorot_uniform(p.fc2, rng);
    p.in2 = NormParams::identity(config.fc2);
    for (auto& g : p.gru) glorot_uniform(g, rng);
    glorot_uniform(p.out, rng);
    return p;
}

void NetParams::set_zero() {
    for (Tensor* t : tensors()) t->set_zero();
}

std::vector<Tensor*> NetParams::tensors() {
    std::vector<Tensor*> list{&fc1.weight, &fc1.bias, &in1.gain, &in1.shift, &fc2.weight, &fc2.bias, &in2.gain, &in2.shift};
    for (auto& g : gru) {
        list.push_back(&g.w);
        list.push_back(&g.u);
        list.push_back(&g.b);
    }
    list.push_back(&out.weight);
    list.push_back(&out.bias);
    return list;
}

std::vector<const Tensor*> NetParams::tensors() const {
    auto mutable_list = const_cast<NetParams*>(this)->tensors();
    return {mutable_list.begin(), mutable_list.end()};
}

std::vector<std::string> NetParams::tensor_names() const {
    std::vector<std::string> names{"fc1.weight", "fc1.bias", "in1.gain", "in1.shift",
                                   "fc2.weight", "fc2.bias", "in2.gain", "in2.shift"};
    for (std::size_t i = 0; i < gru.size(); ++i) {
        const std::string prefix = "gru" + std::to_string(i + 1) + ".";
        names.push_back(prefix + "w");
        names.push_back(prefix + "u");
        names.push_back(prefix + "b");
    }
    names.push_back("out.weight");
    names.push_back("out.bias");
    return names;
}

void NetParams::accumulate(const NetParams& other) {
    auto mine = tensors();
    auto theirs = other.tensors();
    if (mine.size() != theirs.size()) throw ShapeError("NetParams::accumulate: structure mismatch");
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (!mine[i]->same_shape(*theirs[i])) throw ShapeError("NetParams::accumulate: shape mismatch");
        mine[i]->row_vector() += theirs[i]->row_vector();
    }
}

void NetParams::scale(double factor) {
    for (Tensor* t : tensors()) t->row_vector() *= factor;
}

bool NetParams::all_finite() const {
    for (const Tensor* t : tensors()) {
        if (!t->all_finite()) return false;
    }
    return true;
}

std::size_t param_count(const NetParams& params) {
    std::size_t n = 0;
    for (const Tensor* t : params.tensors()) n += t->size();
    return n;
}

std::size_t param_count(const ModelConfig& config) {
    config.validate();
    std::size_t n = config.input_dim * config.fc1 + config.fc1;  // FC1
    n += 2 * config.fc1;                                          // IN1
    n += config.fc1 * config.fc2 + config.fc2;                    // FC2
    n += 2 * config.fc2;                                          // IN2
    std::size_t in = config.fc2;
    for (std::size_t h : config.gru) {
        n += 3 * (in * h + h * h + h);
        in = h;
    }
    n += in * config.num_classes + config.num_classes;
    return n;
}

// ---------------------------------------------------------------------------

ForwardCache forward_batch(const NetParams& params, std::span<const WalkFeatures> walks) {
    if (walks.empty()) throw std::invalid_argument("forward_batch: empty batch");
    std::vector<std::size_t> lengths;
    lengths.reserve(walks.size());
    for (const auto& w : walks) {
        if (static_cast<std::size_t>(w.cols()) != params.config.input_dim) throw ShapeError("forward_batch: feature dimension mismatch");
        lengths.push_back(static_cast<std::size_t>(w.rows()));
    }
    ForwardCache c;
    c.layout = PackedLayout(std::move(lengths));
    c.input.resize(static_cast<Eigen::Index>(c.layout.rows()), static_cast<Eigen::Index>(params.config.input_dim));
    for (std::size_t s = 0; s < walks.size(); ++s) {
        for (std::size_t t = 0; t < c.layout.length(s); ++t) {
            c.input.row(static_cast<Eigen::Index>(c.layout.row(s, t))) = walks[s].row(static_cast<Eigen::Index>(t));
        }
    }
    require_finite(c.input, "walk features");

    const double eps = params.config.norm_eps;
    c.fc1_out = fc_forward(c.input, params.fc1);
    c.act1 = relu_forward(instance_norm_forward(c.fc1_out, c.layout, params.in1, eps, c.in1));
    c.fc2_out = fc_forward(c.act1, params.fc2);
    c.act2 = relu_forward(instance_norm_forward(c.fc2_out, c.layout, params.in2, eps, c.in2));
    c.gru.resize(params.gru.size());
    const Matrix* x = &c.act2;
    for (std::size_t i = 0; i < params.gru.size(); ++i) {
        gru_layer_forward(*x, c.layout, params.gru[i], c.gru[i]);
        x = &c.gru[i].hidden;
    }
    c.rnn_out = *x;
    c.logits = fc_forward(c.rnn_out, params.out);
    return c;
}

void backward_batch(const NetParams& params, const ForwardCache& c, const Matrix& dlogits, NetParams& grads) {
    if (dlogits.rows() != c.logits.rows() || dlogits.cols() != c.logits.cols()) {
        throw ShapeError("backward_batch: gradient shape does not match logits");
    }
    Matrix d = fc_backward(c.rnn_out, params.out, dlogits, grads.out);
    for (std::size_t i = params.gru.size(); i-- > 0;) {
        d = gru_layer_backward(c.layout, params.gru[i], c.gru[i], d, grads.gru[i]);
    }
    d = relu_backward(c.act2, d);
    d = instance_norm_backward(c.layout, params.in2, c.in2, d, grads.in2);
    d = fc_backward(c.act1, params.fc2, d, grads.fc2);
    d = relu_backward(c.act1, d);
    d = instance_norm_backward(c.layout, params.in1, c.in1, d, grads.in1);
    fc_backward(c.input, params.fc1, d, grads.fc1);
}

StepLogits forward(const WalkFeatures& features, const NetParams& params) {
    const ForwardCache c = forward_batch(params, std::span<const WalkFeatures>(&features, 1));
    return c.logits;  // a single walk packs in step order
}

// ---------------------------------------------------------------------------

LossResult classification_loss(const StepLogits& logits, int class_id) {
    if (logits.rows() < 1) throw std::invalid_argument("classification_loss: empty walk");
    if (class_id < 0) throw std::out_of_range("classification_loss: negative class id");
    const Eigen::Index last = logits.rows() - 1;
    const LossGrad lg = softmax_cross_entropy(logits.row(last), static_cast<std::size_t>(class_id));
    LossResult out;
    out.loss = lg.loss;
    out.grad = Matrix::Zero(logits.rows(), logits.cols());
    out.grad.row(last) = lg.grad;
    return out;
}

std::size_t second_half_begin(std::size_t walk_length) { return (walk_length + 1) / 2; }

LossResult segmentation_loss(const StepLogits& logits, const Walk& walk, std::span<const int> vertex_segments) {
    const std::size_t len = walk.size();
    if (static_cast<std::size_t>(logits.rows()) != len) throw ShapeError("segmentation_loss: logits/walk length mismatch");
    LossResult out;
    out.grad = Matrix::Zero(logits.rows(), logits.cols());
    const std::size_t begin = second_half_begin(len);
    if (begin >= len) return out;  // length-1 walks carry no second half
    const double weight = 1.0 / static_cast<double>(len - begin);
    for (std::size_t t = begin; t < len; ++t) {
        const std::size_t v = walk.vertices[t];
        if (v >= vertex_segments.size()) throw std::out_of_range("segmentation_loss: vertex without a label");
        const int label = vertex_segments[v];
        if (label < 0) throw std::out_of_range("segmentation_loss: negative segment id");
        const auto row = static_cast<Eigen::Index>(t);
        const LossGrad lg = softmax_cross_entropy(logits.row(row), static_cast<std::size_t>(label));
        out.loss += weight * lg.loss;
        out.grad.row(row) = weight * lg.grad;
    }
    return out;
}

}  // namespace strider
