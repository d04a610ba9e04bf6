#pragma once

// Forward kernels on dense Eigen expressions. Templated on the scalar so the
// same routines run on double (training) and long double (diagnostics).

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "slr/error.hpp"
#include "slr/numerics/tensor.hpp"

namespace slr {

/// Slices run along `axis`: 1 means each row is a slice, 0 means each column.
enum class Axis : int { Cols = 0, Rows = 1 };

namespace detail {
inline void check_axis(int axis) {
    if (axis != 0 && axis != 1) throw ParameterError("axis must be 0 or 1, got " + std::to_string(axis));
}
} // namespace detail

/// Temperature softmax along `axis` with max subtraction.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& x, int axis,
                                          typename Derived::Scalar temperature) {
    using S = typename Derived::Scalar;
    detail::check_axis(axis);
    if (!(temperature > S(0))) throw ParameterError("softmax: temperature must be positive");
    MatrixX<S> out(x.rows(), x.cols());
    if (axis == 1) {
        for (Index i = 0; i < x.rows(); ++i) {
            const S m = x.row(i).maxCoeff();
            out.row(i) = ((x.row(i).array() - m) / temperature).exp().matrix();
            out.row(i) /= out.row(i).sum();
        }
    } else {
        for (Index j = 0; j < x.cols(); ++j) {
            const S m = x.col(j).maxCoeff();
            out.col(j) = ((x.col(j).array() - m) / temperature).exp().matrix();
            out.col(j) /= out.col(j).sum();
        }
    }
    return out;
}

/// Per-slice KL(p || q) with 0 log 0 = 0. Returns a column of slice values
/// (one per row when axis = 1, one per column when axis = 0).
template <typename DerivedP, typename DerivedQ>
VectorX<typename DerivedP::Scalar> kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                                 const Eigen::MatrixBase<DerivedQ>& q, int axis) {
    using S = typename DerivedP::Scalar;
    detail::check_axis(axis);
    if (p.rows() != q.rows() || p.cols() != q.cols()) throw DimensionError("kl_divergence: shape mismatch");
    const Index slices = axis == 1 ? p.rows() : p.cols();
    const Index width = axis == 1 ? p.cols() : p.rows();
    VectorX<S> out(slices);
    for (Index s = 0; s < slices; ++s) {
        S sum_p(0), sum_q(0), acc(0);
        for (Index k = 0; k < width; ++k) {
            const S pv = axis == 1 ? p(s, k) : p(k, s);
            const S qv = axis == 1 ? q(s, k) : q(k, s);
            if (pv < S(0) || qv < S(0)) throw ParameterError("kl_divergence: negative probability");
            sum_p += pv;
            sum_q += qv;
            if (pv == S(0)) continue;
            if (qv == S(0)) throw DivergenceError("kl_divergence: q = 0 where p > 0");
            acc += pv * std::log(pv / qv);
        }
        using std::abs;
        if (abs(sum_p - S(1)) > S(1e-9) || abs(sum_q - S(1)) > S(1e-9)) {
            throw ParameterError("kl_divergence: slice does not sum to 1");
        }
        out(s) = acc < S(0) ? S(0) : acc;
    }
    return out;
}

/// Unit L2 norm along `axis`. Zero slices are rejected.
template <typename Derived>
MatrixX<typename Derived::Scalar> l2_normalize(const Eigen::MatrixBase<Derived>& x, int axis) {
    using S = typename Derived::Scalar;
    detail::check_axis(axis);
    MatrixX<S> out = x;
    const Index slices = axis == 1 ? x.rows() : x.cols();
    for (Index s = 0; s < slices; ++s) {
        const S n = axis == 1 ? x.row(s).norm() : x.col(s).norm();
        if (!(n > S(0))) throw EvaluationError("l2_normalize: zero-length slice");
        if (axis == 1) out.row(s) /= n; else out.col(s) /= n;
    }
    return out;
}

/// Mean softmax cross-entropy of each row of `logits` against its label.
template <typename Derived, typename Labels>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& logits, const Labels& labels) {
    using S = typename Derived::Scalar;
    if (static_cast<Index>(labels.size()) != logits.rows()) throw DimensionError("cross_entropy: label count");
    S total(0);
    for (Index i = 0; i < logits.rows(); ++i) {
        const auto label = labels[static_cast<std::size_t>(i)];
        if (label < 0 || label >= logits.cols()) throw LabelError("cross_entropy: label out of range");
        const S m = logits.row(i).maxCoeff();
        const S lse = m + std::log((logits.row(i).array() - m).exp().sum());
        total += lse - logits(i, label);
    }
    return total / S(logits.rows());
}

} // namespace slr
