#include "strider/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "strider/errors.hpp"

namespace strider {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)), values_(element_count(shape_), 0.0) {
    if (shape_.size() > 2) throw ShapeError("Tensor: only rank 1 and rank 2 are supported");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    if (shape_.size() > 2) throw ShapeError("Tensor: only rank 1 and rank 2 are supported");
    if (values_.size() != element_count(shape_)) throw ShapeError("Tensor: value count does not match shape " + shape_string());
}

Tensor Tensor::from_matrix(const Matrix& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    t.matrix() = m;
    return t;
}

Tensor Tensor::from_row(const RowVector& v) {
    Tensor t({static_cast<std::size_t>(v.size())});
    t.row_vector() = v;
    return t;
}

Eigen::Index Tensor::rows() const {
    if (shape_.size() == 2) return static_cast<Eigen::Index>(shape_[0]);
    return 1;
}

Eigen::Index Tensor::cols() const {
    if (shape_.size() == 2) return static_cast<Eigen::Index>(shape_[1]);
    if (shape_.size() == 1) return static_cast<Eigen::Index>(shape_[0]);
    return 1;
}

void Tensor::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool Tensor::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
    if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

}  // namespace strider
