#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "slr/numerics/kernels.hpp"
#include "slr/numerics/tensor.hpp"

namespace slr::ad {

/// Primitive operations recorded on a Tape. Each has a fixed local-gradient rule.
enum class Op {
    Leaf,
    MatMul,          // a * b
    MatMulTransB,    // a * b^T
    Transpose,
    Add,
    Sub,
    Mul,             // elementwise
    AddRowBroadcast, // a + 1 * b, b is 1 x n
    Scale,
    Relu,
    Log,
    Exp,
    Mean,            // -> 1 x 1
    Sum,             // -> 1 x 1
    Softmax,         // along axis, with temperature
    KlDivergence,    // KL(a || b) per slice -> column
    L2Normalize,     // along axis
    CrossEntropy,    // mean over rows against integer labels -> 1 x 1
    GraphPropagate,  // per block of rows f: a * b_f, a is N x N
    SegmentMean,     // out row g = mean of the listed rows of a
    SelectRows,
};

const char* op_name(Op op);

class Tape;

/// Handle to one recorded node. Cheap to copy; only meaningful with its Tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Matrix& value() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    double scalar() const;
};

/// Gradients of one scalar output with respect to every node.
class Gradients {
public:
    explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}
    const Matrix& operator[](Var v) const { return grads_.at(static_cast<std::size_t>(v.id)); }

private:
    std::vector<Matrix> grads_;
};

/// The computation record: an append-only list of primitive applications.
/// Forward values are computed eagerly as nodes are appended.
class Tape {
public:
    struct Aux {
        std::vector<int> labels;
        std::vector<std::vector<Index>> groups;
        std::vector<Index> rows;
    };

    struct Node {
        Op op = Op::Leaf;
        int lhs = -1;
        int rhs = -1;
        double scalar = 0.0;
        int axis = 1;
        std::shared_ptr<const Aux> aux;
        bool parameter = false;
        Matrix value;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf that receives a gradient.
    Var parameter(Matrix value);
    /// Leaf treated as data; it still gets a gradient entry (possibly unused).
    Var constant(Matrix value);

    Var matmul(Var a, Var b);
    Var matmul_transposed(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var add_row_broadcast(Var a, Var row);
    Var scale(Var a, double s);
    Var relu(Var a);
    Var log(Var a);
    Var exp(Var a);
    Var mean(Var a);
    Var sum(Var a);
    Var softmax(Var a, int axis, double temperature);
    Var kl_divergence(Var p, Var q, int axis);
    Var l2_normalize(Var a, int axis);
    Var cross_entropy(Var logits, std::vector<int> labels);
    Var graph_propagate(Var adjacency, Var features);
    Var segment_mean(Var a, std::vector<std::vector<Index>> groups);
    Var select_rows(Var a, std::vector<Index> rows);

    const Matrix& value(Var v) const { return node(v).value; }
    const Node& node(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }
    std::span<const Node> nodes() const { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse accumulation from a 1 x 1 output. Leaves off the path get zeros.
    Gradients backward(Var output) const;

    /// Recompute every non-leaf value from the recorded inputs.
    std::vector<Matrix> replay() const;

private:
    Var push(Node n);
    static Matrix forward(const Node& n, const Matrix* lhs, const Matrix* rhs);
    const Matrix& at(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

    std::vector<Node> nodes_;
};

// Expression-style free functions.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(double s, Var a) { return a.tape->scale(a, s); }
inline Var matmul(Var a, Var b) { return a.tape->matmul(a, b); }
inline Var relu(Var a) { return a.tape->relu(a); }
inline Var mean(Var a) { return a.tape->mean(a); }

} // namespace slr::ad
