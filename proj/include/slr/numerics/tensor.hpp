#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "slr/error.hpp"

namespace slr {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// Dense row-major n-d array of finite values.
template <typename Scalar>
class BasicTensor {
public:
    using Shape = std::vector<Index>;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape, Scalar fill = Scalar(0))
        : shape_(std::move(shape)), values_(count(shape_), fill) {
        check_finite();
    }

    BasicTensor(Shape shape, std::vector<Scalar> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (static_cast<Index>(values_.size()) != count(shape_)) {
            throw DimensionError("tensor: value count " + std::to_string(values_.size()) +
                                 " does not match shape product " + std::to_string(count(shape_)));
        }
        check_finite();
    }

    /// 2-d tensor from any Eigen matrix expression.
    template <typename Derived>
    static BasicTensor from_matrix(const Eigen::MatrixBase<Derived>& m) {
        RowMatrixX<Scalar> rm = m.template cast<Scalar>();
        std::vector<Scalar> v(rm.data(), rm.data() + rm.size());
        return BasicTensor({rm.rows(), rm.cols()}, std::move(v));
    }

    const Shape& shape() const noexcept { return shape_; }
    Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
    Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    Index size() const noexcept { return static_cast<Index>(values_.size()); }
    std::span<const Scalar> values() const noexcept { return values_; }

    Scalar operator()(Index i, Index j) const { return values_[offset2(i, j)]; }
    Scalar operator()(Index i, Index j, Index k) const { return values_[offset3(i, j, k)]; }

    void set(Index i, Index j, Scalar v) { values_[offset2(i, j)] = finite(v); }
    void set(Index i, Index j, Index k, Scalar v) { values_[offset3(i, j, k)] = finite(v); }

    /// Copy of a 2-d tensor as a column-major Eigen matrix.
    MatrixX<Scalar> matrix() const {
        if (rank() != 2) throw DimensionError("tensor: matrix() needs rank 2");
        return Eigen::Map<const RowMatrixX<Scalar>>(values_.data(), shape_[0], shape_[1]);
    }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

private:
    static Index count(const Shape& s) {
        for (Index d : s) {
            if (d <= 0) throw DimensionError("tensor: dimension sizes must be positive");
        }
        return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<>());
    }

    static Scalar finite(Scalar v) {
        if (!std::isfinite(static_cast<double>(v))) throw DimensionError("tensor: non-finite value");
        return v;
    }

    void check_finite() const {
        for (Scalar v : values_) finite(v);
    }

    std::size_t offset2(Index i, Index j) const {
        return static_cast<std::size_t>(i * shape_[1] + j);
    }
    std::size_t offset3(Index i, Index j, Index k) const {
        return static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k);
    }

    Shape shape_;
    std::vector<Scalar> values_;
};

using Tensor = BasicTensor<double>;

} // namespace slr
