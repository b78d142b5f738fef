#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <new>
#include <string>
#include <vector>

namespace strider {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using RowVectorMap = Eigen::Map<RowVector>;
using ConstRowVectorMap = Eigen::Map<const RowVector>;

/// Allocates on a fixed 64-byte boundary. Eigen's vectorized reductions peel
/// by pointer alignment, so unaligned buffers make results vary between runs;
/// unlike Eigen::aligned_allocator this does not depend on compile flags.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using TensorValues = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major float64 array with a shape. Gradients are kept in a
/// separate tensor of the same shape (see NetParams::zeros_like).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor from_matrix(const Matrix& m);
    static Tensor from_row(const RowVector& v);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    TensorValues& values() noexcept { return values_; }
    const TensorValues& values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    /// Rank-1 tensors view as a single row, rank-2 as (rows x cols).
    Eigen::Index rows() const;
    Eigen::Index cols() const;
    MatrixMap matrix() { return {values_.data(), rows(), cols()}; }
    ConstMatrixMap matrix() const { return {values_.data(), rows(), cols()}; }
    RowVectorMap row_vector() { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }
    ConstRowVectorMap row_vector() const { return {values_.data(), static_cast<Eigen::Index>(values_.size())}; }

    void set_zero();
    bool all_finite() const;
    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    TensorValues values_;
};

/// Throws NumericalError naming `what` if m has a NaN or Inf entry.
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);

}  // namespace strider
