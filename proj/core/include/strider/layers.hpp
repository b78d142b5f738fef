#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strider/rng.hpp"
#include "strider/tensor.hpp"

namespace strider {

// ---------------------------------------------------------------------------
// Parameters

struct LinearParams {
    Tensor weight;  ///< (in x out); y = x W + b
    Tensor bias;    ///< (out)

    static LinearParams zeros(std::size_t in, std::size_t out);
    std::size_t in_dim() const { return weight.shape()[0]; }
    std::size_t out_dim() const { return weight.shape()[1]; }
};

struct NormParams {
    Tensor gain;   ///< (channels), initialized to 1
    Tensor shift;  ///< (channels), initialized to 0

    static NormParams identity(std::size_t channels);
    static NormParams zeros(std::size_t channels);
};

/// GRU weights with the three gates stored side by side in (z | r | h) order:
/// W is (in x 3H), U is (H x 3H), b is (3H).
///
///   z = sigmoid(x W_z + h U_z + b_z)
///   r = sigmoid(x W_r + h U_r + b_r)
///   n = tanh(x W_h + (h U_h) * r + b_h)
///   h' = z * h + (1 - z) * n
struct GRUCellParams {
    Tensor w;
    Tensor u;
    Tensor b;

    static GRUCellParams zeros(std::size_t in, std::size_t hidden);
    std::size_t in_dim() const { return w.shape()[0]; }
    std::size_t hidden() const { return u.shape()[0]; }

    auto w_z() const { return w.matrix().middleCols(0, static_cast<Eigen::Index>(hidden())); }
    auto w_r() const { return w.matrix().middleCols(static_cast<Eigen::Index>(hidden()), static_cast<Eigen::Index>(hidden())); }
    auto w_h() const { return w.matrix().middleCols(2 * static_cast<Eigen::Index>(hidden()), static_cast<Eigen::Index>(hidden())); }
    auto u_z() const { return u.matrix().middleCols(0, static_cast<Eigen::Index>(hidden())); }
    auto u_r() const { return u.matrix().middleCols(static_cast<Eigen::Index>(hidden()), static_cast<Eigen::Index>(hidden())); }
    auto u_h() const { return u.matrix().middleCols(2 * static_cast<Eigen::Index>(hidden()), static_cast<Eigen::Index>(hidden())); }
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void glorot_uniform(LinearParams& p, Rng& rng);
void glorot_uniform(GRUCellParams& p, Rng& rng);

// ---------------------------------------------------------------------------
// Packed variable-length batches

/// Time-major packing of a batch of sequences. Sequences are ranked by
/// decreasing length (stable), so the sequences still active at step t are
/// exactly ranks [0, batch_sizes[t]) and occupy rows offsets[t] + rank.
class PackedLayout {
public:
    PackedLayout() = default;
    explicit PackedLayout(std::vector<std::size_t> lengths);

    std::size_t batch() const noexcept { return lengths_.size(); }
    std::size_t steps() const noexcept { return batch_sizes_.size(); }
    std::size_t rows() const noexcept { return total_rows_; }
    std::size_t length(std::size_t seq) const { return lengths_[seq]; }
    std::size_t batch_size(std::size_t t) const { return batch_sizes_[t]; }
    std::size_t offset(std::size_t t) const { return offsets_[t]; }
    std::size_t row(std::size_t seq, std::size_t t) const { return offsets_[t] + rank_[seq]; }
    std::size_t seq_at_rank(std::size_t rank) const { return order_[rank]; }

    /// Copies sequence-major blocks (one matrix per sequence) into packed rows.
    Matrix pack(std::span<const Matrix> sequences) const;
    /// Rows of one sequence, in step order.
    Matrix unpack(const Matrix& packed, std::size_t seq) const;

private:
    std::vector<std::size_t> lengths_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_;
    std::vector<std::size_t> batch_sizes_;
    std::vector<std::size_t> offsets_;
    std::size_t total_rows_ = 0;
};

// ---------------------------------------------------------------------------
// Fully connected

Matrix fc_forward(const Matrix& x, const LinearParams& p);
/// Accumulates into grad; returns dL/dx.
Matrix fc_backward(const Matrix& x, const LinearParams& p, const Matrix& dy, LinearParams& grad);

// ---------------------------------------------------------------------------
// Instance normalization over the steps of each sequence

struct InstanceNormCache {
    Matrix normalized;  ///< x_hat, packed rows
    Matrix inv_std;     ///< (batch x channels)
};

Matrix instance_norm_forward(const Matrix& x, const PackedLayout& layout, const NormParams& p, double eps,
                             InstanceNormCache& cache);
Matrix instance_norm_backward(const PackedLayout& layout, const NormParams& p, const InstanceNormCache& cache,
                              const Matrix& dy, NormParams& grad);

/// Single sequence (steps x channels).
Matrix instance_norm(const Matrix& x, const NormParams& p, double eps = 1e-5);

// ---------------------------------------------------------------------------
// ReLU

Matrix relu_forward(const Matrix& x);
/// dy masked by (y > 0), where y is the forward output.
Matrix relu_backward(const Matrix& y, const Matrix& dy);

// ---------------------------------------------------------------------------
// GRU

RowVector gru_cell(const RowVector& x, const RowVector& h_prev, const GRUCellParams& p);

struct GRUCellGrads {
    RowVector dx;
    RowVector dh_prev;
};
/// Backward of a single cell given dL/dh_t; accumulates parameter gradients.
GRUCellGrads gru_cell_backward(const RowVector& x, const RowVector& h_prev, const GRUCellParams& p,
                               const RowVector& dh, GRUCellParams& grad);

struct GRUCache {
    Matrix input;   ///< layer input (packed)
    Matrix hidden;  ///< h_t per packed row
    Matrix update;  ///< z_t
    Matrix reset;   ///< r_t
    Matrix candidate;       ///< n_t (h tilde)
    Matrix recurrent_cand;  ///< h_{t-1} U_h
};

/// Runs one GRU layer over every sequence in the batch starting from h = 0;
/// returns all hidden states (packed).
Matrix gru_layer_forward(const Matrix& x, const PackedLayout& layout, const GRUCellParams& p, GRUCache& cache);
/// Full backpropagation through time; returns dL/dx.
Matrix gru_layer_backward(const PackedLayout& layout, const GRUCellParams& p, const GRUCache& cache, const Matrix& dh,
                          GRUCellParams& grad);

/// Single sequence (steps x in) -> (steps x hidden), h0 = 0.
Matrix gru_sequence(const Matrix& x, const GRUCellParams& p);

// ---------------------------------------------------------------------------
// Softmax cross-entropy

RowVector softmax(const Eigen::Ref<const RowVector>& logits);

struct LossGrad {
    double loss = 0.0;
    RowVector grad;  ///< dL/dlogits = softmax - onehot
};

LossGrad softmax_cross_entropy(const Eigen::Ref<const RowVector>& logits, std::size_t label);

}  // namespace strider
