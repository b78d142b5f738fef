#include "strider/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strider/errors.hpp"

namespace strider {
namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
    return (1.0 + (-a).exp()).inverse();
}

void check_cols(const Matrix& x, std::size_t expected, const char* what) {
    if (static_cast<std::size_t>(x.cols()) != expected) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) + " columns, got " +
                         std::to_string(x.cols()));
    }
}

}  // namespace

// ---------------------------------------------------------------------------

LinearParams LinearParams::zeros(std::size_t in, std::size_t out) {
    return LinearParams{Tensor::zeros({in, out}), Tensor::zeros({out})};
}

NormParams NormParams::identity(std::size_t channels) {
    NormParams p = zeros(channels);
    p.gain.row_vector().setOnes();
    return p;
}

NormParams NormParams::zeros(std::size_t channels) {
    return NormParams{Tensor::zeros({channels}), Tensor::zeros({channels})};
}

GRUCellParams GRUCellParams::zeros(std::size_t in, std::size_t hidden) {
    return GRUCellParams{Tensor::zeros({in, 3 * hidden}), Tensor::zeros({hidden, 3 * hidden}), Tensor::zeros({3 * hidden})};
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

void glorot_uniform(LinearParams& p, Rng& rng) {
    glorot_uniform(p.weight, p.in_dim(), p.out_dim(), rng);
    p.bias.set_zero();
}

void glorot_uniform(GRUCellParams& p, Rng& rng) {
    // Each gate block is its own (fan_in x hidden) matrix.
    glorot_uniform(p.w, p.in_dim(), p.hidden(), rng);
    glorot_uniform(p.u, p.hidden(), p.hidden(), rng);
    p.b.set_zero();
}

// ---------------------------------------------------------------------------

PackedLayout::PackedLayout(std::vector<std::size_t> lengths) : lengths_(std::move(lengths)) {
    const std::size_t n = lengths_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return lengths_[a] > lengths_[b]; });
    rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) rank_[order_[r]] = r;
    const std::size_t max_len = n ? lengths_[order_[0]] : 0;
    batch_sizes_.assign(max_len, 0);
    offsets_.assign(max_len, 0);
    for (std::size_t len : lengths_) {
        if (len == 0) throw std::invalid_argument("PackedLayout: empty sequence");
        for (std::size_t t = 0; t < len; ++t) ++batch_sizes_[t];
    }
    for (std::size_t t = 0; t < max_len; ++t) {
        offsets_[t] = total_rows_;
        total_rows_ += batch_sizes_[t];
    }
}

Matrix PackedLayout::pack(std::span<const Matrix> sequences) const {
    if (sequences.size() != batch()) throw ShapeError("PackedLayout::pack: sequence count mismatch");
    const Eigen::Index cols = batch() ? sequences[0].cols() : 0;
    Matrix out(idx(total_rows_), cols);
    for (std::size_t s = 0; s < batch(); ++s) {
        if (static_cast<std::size_t>(sequences[s].rows()) != lengths_[s] || sequences[s].cols() != cols) {
            throw ShapeError("PackedLayout::pack: sequence shape mismatch");
        }
        for (std::size_t t = 0; t < lengths_[s]; ++t) out.row(idx(row(s, t))) = sequences[s].row(idx(t));
    }
    return out;
}

Matrix PackedLayout::unpack(const Matrix& packed, std::size_t seq) const {
    Matrix out(idx(lengths_[seq]), packed.cols());
    for (std::size_t t = 0; t < lengths_[seq]; ++t) out.row(idx(t)) = packed.row(idx(row(seq, t)));
    return out;
}

// ---------------------------------------------------------------------------

Matrix fc_forward(const Matrix& x, const LinearParams& p) {
    check_cols(x, p.in_dim(), "fc_forward");
    Matrix y(x.rows(), idx(p.out_dim()));
    y.noalias() = x * p.weight.matrix();
    y.rowwise() += p.bias.row_vector();
    require_finite(y, "fully connected output");
    return y;
}

Matrix fc_backward(const Matrix& x, const LinearParams& p, const Matrix& dy, LinearParams& grad) {
    check_cols(dy, p.out_dim(), "fc_backward");
    grad.weight.matrix().noalias() += x.transpose() * dy;
    grad.bias.row_vector() += dy.colwise().sum();
    Matrix dx(x.rows(), x.cols());
    dx.noalias() = dy * p.weight.matrix().transpose();
    require_finite(dx, "fully connected input gradient");
    return dx;
}

// ---------------------------------------------------------------------------

Matrix instance_norm_forward(const Matrix& x, const PackedLayout& layout, const NormParams& p, double eps,
                             InstanceNormCache& cache) {
    const Eigen::Index channels = x.cols();
    check_cols(x, static_cast<std::size_t>(p.gain.size()), "instance_norm_forward");
    cache.normalized.resize(x.rows(), channels);
    cache.inv_std.resize(idx(layout.batch()), channels);
    Matrix y(x.rows(), channels);
    const auto gain = p.gain.row_vector();
    const auto shift = p.shift.row_vector();
    for (std::size_t s = 0; s < layout.batch(); ++s) {
        const std::size_t len = layout.length(s);
        RowVector mean = RowVector::Zero(channels);
        for (std::size_t t = 0; t < len; ++t) mean += x.row(idx(layout.row(s, t)));
        mean /= static_cast<double>(len);
        RowVector var = RowVector::Zero(channels);
        for (std::size_t t = 0; t < len; ++t) {
            var.array() += (x.row(idx(layout.row(s, t))) - mean).array().square();
        }
        var /= static_cast<double>(len);
        const RowVector inv_std = (var.array() + eps).rsqrt().matrix();
        cache.inv_std.row(idx(s)) = inv_std;
        for (std::size_t t = 0; t < len; ++t) {
            const Eigen::Index r = idx(layout.row(s, t));
            cache.normalized.row(r) = ((x.row(r) - mean).array() * inv_std.array()).matrix();
            y.row(r) = (cache.normalized.row(r).array() * gain.array() + shift.array()).matrix();
        }
    }
    require_finite(y, "instance normalization output");
    return y;
}

Matrix instance_norm_backward(const PackedLayout& layout, const NormParams& p, const InstanceNormCache& cache,
                              const Matrix& dy, NormParams& grad) {
    const Eigen::Index channels = dy.cols();
    const auto gain = p.gain.row_vector();
    grad.gain.row_vector() += (dy.array() * cache.normalized.array()).matrix().colwise().sum();
    grad.shift.row_vector() += dy.colwise().sum();
    Matrix dx(dy.rows(), channels);
    for (std::size_t s = 0; s < layout.batch(); ++s) {
        const std::size_t len = layout.length(s);
        RowVector mean_d = RowVector::Zero(channels);
        RowVector mean_dx = RowVector::Zero(channels);
        for (std::size_t t = 0; t < len; ++t) {
            const Eigen::Index r = idx(layout.row(s, t));
            const RowVector d = (dy.row(r).array() * gain.array()).matrix();
            mean_d += d;
            mean_dx += (d.array() * cache.normalized.row(r).array()).matrix();
        }
        mean_d /= static_cast<double>(len);
        mean_dx /= static_cast<double>(len);
        const auto inv_std = cache.inv_std.row(idx(s)).array();
        for (std::size_t t = 0; t < len; ++t) {
            const Eigen::Index r = idx(layout.row(s, t));
            const auto d = dy.row(r).array() * gain.array();
            dx.row(r) = (inv_std * (d - mean_d.array() - cache.normalized.row(r).array() * mean_dx.array())).matrix();
        }
    }
    require_finite(dx, "instance normalization input gradient");
    return dx;
}

Matrix instance_norm(const Matrix& x, const NormParams& p, double eps) {
    const PackedLayout layout({static_cast<std::size_t>(x.rows())});
    InstanceNormCache cache;
    return instance_norm_forward(x, layout, p, eps, cache);
}

// ---------------------------------------------------------------------------

Matrix relu_forward(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& y, const Matrix& dy) {
    return (y.array() > 0.0).select(dy, 0.0);
}

// ---------------------------------------------------------------------------

RowVector gru_cell(const RowVector& x, const RowVector& h_prev, const GRUCellParams& p) {
    check_cols(x, p.in_dim(), "gru_cell input");
    check_cols(h_prev, p.hidden(), "gru_cell state");
    if (!h_prev.allFinite()) throw NumericalError("gru_cell: non-finite previous state");
    const RowVector z = sigmoid((x * p.w_z() + h_prev * p.u_z() + p.b.row_vector().head(idx(p.hidden()))).array()).matrix();
    const RowVector r =
        sigmoid((x * p.w_r() + h_prev * p.u_r() + p.b.row_vector().segment(idx(p.hidden()), idx(p.hidden()))).array()).matrix();
    const RowVector n = ((x * p.w_h()).array() + (h_prev * p.u_h()).array() * r.array() +
                         p.b.row_vector().tail(idx(p.hidden())).array())
                            .tanh()
                            .matrix();
    RowVector h = (z.array() * h_prev.array() + (1.0 - z.array()) * n.array()).matrix();
    require_finite(h, "gru_cell output");
    return h;
}

GRUCellGrads gru_cell_backward(const RowVector& x, const RowVector& h_prev, const GRUCellParams& p, const RowVector& dh,
                               GRUCellParams& grad) {
    const Eigen::Index hidden = idx(p.hidden());
    const RowVector z = sigmoid((x * p.w_z() + h_prev * p.u_z() + p.b.row_vector().head(hidden)).array()).matrix();
    const RowVector r = sigmoid((x * p.w_r() + h_prev * p.u_r() + p.b.row_vector().segment(hidden, hidden)).array()).matrix();
    const RowVector uh = h_prev * p.u_h();
    const RowVector n =
        ((x * p.w_h()).array() + uh.array() * r.array() + p.b.row_vector().tail(hidden).array()).tanh().matrix();

    const auto dz = dh.array() * (h_prev.array() - n.array());
    const auto dn = dh.array() * (1.0 - z.array());
    const auto dan = dn * (1.0 - n.array().square());
    const auto daz = dz * z.array() * (1.0 - z.array());
    const auto dar = dan * uh.array() * r.array() * (1.0 - r.array());

    RowVector dpre(3 * hidden);  // gradient w.r.t. x W + b blocks
    dpre << daz.matrix(), dar.matrix(), dan.matrix();
    RowVector drec(3 * hidden);  // gradient w.r.t. h U blocks
    drec << daz.matrix(), dar.matrix(), (dan * r.array()).matrix();

    grad.w.matrix().noalias() += x.transpose() * dpre;
    grad.u.matrix().noalias() += h_prev.transpose() * drec;
    grad.b.row_vector() += dpre;

    GRUCellGrads out;
    out.dx = dpre * p.w.matrix().transpose();
    out.dh_prev = (dh.array() * z.array()).matrix() + drec * p.u.matrix().transpose();
    return out;
}

Matrix gru_layer_forward(const Matrix& x, const PackedLayout& layout, const GRUCellParams& p, GRUCache& cache) {
    check_cols(x, p.in_dim(), "gru_layer_forward");
    const Eigen::Index hidden = idx(p.hidden());
    const Eigen::Index rows = x.rows();
    cache.input = x;
    // Input projections for every step at once.
    Matrix pre(rows, 3 * hidden);
    pre.noalias() = x * p.w.matrix();
    pre.rowwise() += p.b.row_vector();

    cache.hidden.resize(rows, hidden);
    cache.update.resize(rows, hidden);
    cache.reset.resize(rows, hidden);
    cache.candidate.resize(rows, hidden);
    cache.recurrent_cand.resize(rows, hidden);
    Matrix rec;
    for (std::size_t t = 0; t < layout.steps(); ++t) {
        const Eigen::Index r0 = idx(layout.offset(t));
        const Eigen::Index nb = idx(layout.batch_size(t));
        auto pre_t = pre.middleRows(r0, nb);
        auto z = cache.update.middleRows(r0, nb);
        auto r = cache.reset.middleRows(r0, nb);
        auto n = cache.candidate.middleRows(r0, nb);
        auto uh = cache.recurrent_cand.middleRows(r0, nb);
        auto h = cache.hidden.middleRows(r0, nb);
        if (t == 0) {
            z = sigmoid(pre_t.leftCols(hidden).array()).matrix();
            r = sigmoid(pre_t.middleCols(hidden, hidden).array()).matrix();
            uh.setZero();
            n = pre_t.rightCols(hidden).array().tanh().matrix();
            h = ((1.0 - z.array()) * n.array()).matrix();
        } else {
            const auto h_prev = cache.hidden.middleRows(idx(layout.offset(t - 1)), nb);
            rec.resize(nb, 3 * hidden);
            rec.noalias() = h_prev * p.u.matrix();
            z = sigmoid(pre_t.leftCols(hidden).array() + rec.leftCols(hidden).array()).matrix();
            r = sigmoid(pre_t.middleCols(hidden, hidden).array() + rec.middleCols(hidden, hidden).array()).matrix();
            uh = rec.rightCols(hidden);
            n = (pre_t.rightCols(hidden).array() + uh.array() * r.array()).tanh().matrix();
            h = (z.array() * h_prev.array() + (1.0 - z.array()) * n.array()).matrix();
        }
    }
    require_finite(cache.hidden, "GRU hidden states");
    return cache.hidden;
}

Matrix gru_layer_backward(const PackedLayout& layout, const GRUCellParams& p, const GRUCache& cache, const Matrix& dh_out,
                          GRUCellParams& grad) {
    const Eigen::Index hidden = idx(p.hidden());
    const Eigen::Index rows = cache.hidden.rows();
    Matrix dpre(rows, 3 * hidden);
    Matrix drec = Matrix::Zero(rows, 3 * hidden);
    Matrix carry = Matrix::Zero(idx(layout.batch()), hidden);
    Matrix dh;
    for (std::size_t t = layout.steps(); t-- > 0;) {
        const Eigen::Index r0 = idx(layout.offset(t));
        const Eigen::Index nb = idx(layout.batch_size(t));
        dh = dh_out.middleRows(r0, nb) + carry.topRows(nb);
        const auto z = cache.update.middleRows(r0, nb).array();
        const auto r = cache.reset.middleRows(r0, nb).array();
        const auto n = cache.candidate.middleRows(r0, nb).array();
        const auto uh = cache.recurrent_cand.middleRows(r0, nb).array();

        const auto dan = dh.array() * (1.0 - z) * (1.0 - n.square());
        auto dpre_t = dpre.middleRows(r0, nb);
        dpre_t.rightCols(hidden) = dan.matrix();
        dpre_t.middleCols(hidden, hidden) = (dan * uh * r * (1.0 - r)).matrix();
        if (t == 0) {
            dpre_t.leftCols(hidden) = (dh.array() * (-n) * z * (1.0 - z)).matrix();
            continue;
        }
        const auto h_prev = cache.hidden.middleRows(idx(layout.offset(t - 1)), nb).array();
        dpre_t.leftCols(hidden) = (dh.array() * (h_prev - n) * z * (1.0 - z)).matrix();
        auto drec_t = drec.middleRows(r0, nb);
        drec_t.leftCols(2 * hidden) = dpre_t.leftCols(2 * hidden);
        drec_t.rightCols(hidden) = (dan * r).matrix();
        auto carry_t = carry.topRows(nb);
        carry_t = (dh.array() * z).matrix();
        carry_t.noalias() += drec_t * p.u.matrix().transpose();
    }

    // dU = sum_t h_{t-1}^T drec_t, as one product over shifted hidden states.
    Matrix h_prev_all = Matrix::Zero(rows, hidden);
    for (std::size_t t = 1; t < layout.steps(); ++t) {
        const Eigen::Index nb = idx(layout.batch_size(t));
        h_prev_all.middleRows(idx(layout.offset(t)), nb) = cache.hidden.middleRows(idx(layout.offset(t - 1)), nb);
    }
    grad.u.matrix().noalias() += h_prev_all.transpose() * drec;
    grad.w.matrix().noalias() += cache.input.transpose() * dpre;
    grad.b.row_vector() += dpre.colwise().sum();
    Matrix dx(rows, cache.input.cols());
    dx.noalias() = dpre * p.w.matrix().transpose();
    require_finite(dx, "GRU input gradient");
    return dx;
}

Matrix gru_sequence(const Matrix& x, const GRUCellParams& p) {
    const PackedLayout layout({static_cast<std::size_t>(x.rows())});
    GRUCache cache;
    return gru_layer_forward(x, layout, p, cache);
}

// ---------------------------------------------------------------------------

RowVector softmax(const Eigen::Ref<const RowVector>& logits) {
    const double m = logits.maxCoeff();
    RowVector e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

LossGrad softmax_cross_entropy(const Eigen::Ref<const RowVector>& logits, std::size_t label) {
    if (logits.size() < 2) throw ShapeError("softmax_cross_entropy: need at least 2 classes");
    if (label >= static_cast<std::size_t>(logits.size())) throw std::out_of_range("softmax_cross_entropy: label out of range");
    const double m = logits.maxCoeff();
    const RowVector shifted = (logits.array() - m).matrix();
    const double lse = std::log(shifted.array().exp().sum());
    LossGrad out;
    out.loss = lse - shifted(idx(label));
    out.grad = (shifted.array() - lse).exp().matrix();
    out.grad(idx(label)) -= 1.0;
    if (!std::isfinite(out.loss)) throw NumericalError("softmax_cross_entropy: non-finite loss");
    return out;
}

}  // namespace strider
