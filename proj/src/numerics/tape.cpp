#include "slr/numerics/tape.hpp"

#include <cmath>
#include <string>

namespace slr::ad {

const char* op_name(Op op) {
    switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::MatMulTransB: return "matmul_transposed";
    case Op::Transpose: return "transpose";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::AddRowBroadcast: return "add_row_broadcast";
    case Op::Scale: return "scale";
    case Op::Relu: return "relu";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Mean: return "mean";
    case Op::Sum: return "sum";
    case Op::Softmax: return "softmax";
    case Op::KlDivergence: return "kl_divergence";
    case Op::L2Normalize: return "l2_normalize";
    case Op::CrossEntropy: return "cross_entropy";
    case Op::GraphPropagate: return "graph_propagate";
    case Op::SegmentMean: return "segment_mean";
    case Op::SelectRows: return "select_rows";
    }
    return "?";
}

const Matrix& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
    const Matrix& v = value();
    if (v.size() != 1) throw ContractError("Var::scalar: value is not 1 x 1");
    return v(0, 0);
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

Matrix one_by_one(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

} // namespace

Var Tape::push(Node n) {
    const Matrix* lhs = n.lhs >= 0 ? &at(n.lhs) : nullptr;
    const Matrix* rhs = n.rhs >= 0 ? &at(n.rhs) : nullptr;
    if (n.op != Op::Leaf) n.value = forward(n, lhs, rhs);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Matrix value) {
    Node n;
    n.parameter = true;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

#define SLR_BINARY(name, opcode)            \
    Var Tape::name(Var a, Var b) {          \
        Node n;                             \
        n.op = opcode;                      \
        n.lhs = a.id;                       \
        n.rhs = b.id;                       \
        return push(std::move(n));          \
    }
#define SLR_UNARY(name, opcode)             \
    Var Tape::name(Var a) {                 \
        Node n;                             \
        n.op = opcode;                      \
        n.lhs = a.id;                       \
        return push(std::move(n));          \
    }

SLR_BINARY(matmul, Op::MatMul)
SLR_BINARY(matmul_transposed, Op::MatMulTransB)
SLR_BINARY(add, Op::Add)
SLR_BINARY(sub, Op::Sub)
SLR_BINARY(mul, Op::Mul)
SLR_BINARY(add_row_broadcast, Op::AddRowBroadcast)
SLR_BINARY(graph_propagate, Op::GraphPropagate)
SLR_UNARY(transpose, Op::Transpose)
SLR_UNARY(relu, Op::Relu)
SLR_UNARY(log, Op::Log)
SLR_UNARY(exp, Op::Exp)
SLR_UNARY(mean, Op::Mean)
SLR_UNARY(sum, Op::Sum)

#undef SLR_BINARY
#undef SLR_UNARY

Var Tape::scale(Var a, double s) {
    Node n;
    n.op = Op::Scale;
    n.lhs = a.id;
    n.scalar = s;
    return push(std::move(n));
}

Var Tape::softmax(Var a, int axis, double temperature) {
    Node n;
    n.op = Op::Softmax;
    n.lhs = a.id;
    n.axis = axis;
    n.scalar = temperature;
    return push(std::move(n));
}

Var Tape::kl_divergence(Var p, Var q, int axis) {
    Node n;
    n.op = Op::KlDivergence;
    n.lhs = p.id;
    n.rhs = q.id;
    n.axis = axis;
    return push(std::move(n));
}

Var Tape::l2_normalize(Var a, int axis) {
    Node n;
    n.op = Op::L2Normalize;
    n.lhs = a.id;
    n.axis = axis;
    return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, std::vector<int> labels) {
    auto aux = std::make_shared<Aux>();
    aux->labels = std::move(labels);
    Node n;
    n.op = Op::CrossEntropy;
    n.lhs = logits.id;
    n.aux = std::move(aux);
    return push(std::move(n));
}

Var Tape::segment_mean(Var a, std::vector<std::vector<Index>> groups) {
    for (const auto& g : groups) {
        if (g.empty()) throw DimensionError("segment_mean: empty group");
    }
    auto aux = std::make_shared<Aux>();
    aux->groups = std::move(groups);
    Node n;
    n.op = Op::SegmentMean;
    n.lhs = a.id;
    n.aux = std::move(aux);
    return push(std::move(n));
}

Var Tape::select_rows(Var a, std::vector<Index> rows) {
    auto aux = std::make_shared<Aux>();
    aux->rows = std::move(rows);
    Node n;
    n.op = Op::SelectRows;
    n.lhs = a.id;
    n.aux = std::move(aux);
    return push(std::move(n));
}

Matrix Tape::forward(const Node& n, const Matrix* lhs, const Matrix* rhs) {
    const Matrix& a = *lhs;
    switch (n.op) {
    case Op::Leaf:
        return n.value;
    case Op::MatMul:
        if (a.cols() != rhs->rows()) {
            throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                                 std::to_string(rhs->rows()) + " differ");
        }
        return a * *rhs;
    case Op::MatMulTransB:
        if (a.cols() != rhs->cols()) throw DimensionError("matmul_transposed: inner dimensions differ");
        return a * rhs->transpose();
    case Op::Transpose:
        return a.transpose();
    case Op::Add:
        require_same_shape(a, *rhs, "add");
        return a + *rhs;
    case Op::Sub:
        require_same_shape(a, *rhs, "sub");
        return a - *rhs;
    case Op::Mul:
        require_same_shape(a, *rhs, "mul");
        return a.cwiseProduct(*rhs);
    case Op::AddRowBroadcast:
        if (rhs->rows() != 1 || rhs->cols() != a.cols()) throw DimensionError("add_row_broadcast: bias shape");
        return a.rowwise() + rhs->row(0);
    case Op::Scale:
        return n.scalar * a;
    case Op::Relu:
        return a.cwiseMax(0.0);
    case Op::Log:
        return a.array().log().matrix();
    case Op::Exp:
        return a.array().exp().matrix();
    case Op::Mean:
        return one_by_one(a.mean());
    case Op::Sum:
        return one_by_one(a.sum());
    case Op::Softmax:
        return slr::softmax(a, n.axis, n.scalar);
    case Op::KlDivergence:
        return slr::kl_divergence(a, *rhs, n.axis);
    case Op::L2Normalize:
        return slr::l2_normalize(a, n.axis);
    case Op::CrossEntropy:
        return one_by_one(slr::cross_entropy(a, n.aux->labels));
    case Op::GraphPropagate: {
        const Matrix& x = *rhs;
        const Index nodes = a.rows();
        if (a.cols() != nodes || nodes == 0 || x.rows() % nodes != 0) {
            throw DimensionError("graph_propagate: feature rows must be a multiple of the adjacency size");
        }
        Matrix out(x.rows(), x.cols());
        for (Index f = 0; f < x.rows() / nodes; ++f) {
            out.middleRows(f * nodes, nodes).noalias() = a * x.middleRows(f * nodes, nodes);
        }
        return out;
    }
    case Op::SegmentMean: {
        const auto& groups = n.aux->groups;
        Matrix out = Matrix::Zero(static_cast<Index>(groups.size()), a.cols());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (Index r : groups[g]) {
                if (r < 0 || r >= a.rows()) throw DimensionError("segment_mean: row out of range");
                out.row(static_cast<Index>(g)) += a.row(r);
            }
            out.row(static_cast<Index>(g)) /= static_cast<double>(groups[g].size());
        }
        return out;
    }
    case Op::SelectRows: {
        const auto& rows = n.aux->rows;
        Matrix out(static_cast<Index>(rows.size()), a.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] < 0 || rows[i] >= a.rows()) throw DimensionError("select_rows: row out of range");
            out.row(static_cast<Index>(i)) = a.row(rows[i]);
        }
        return out;
    }
    }
    throw ContractError("unknown op");
}

Gradients Tape::backward(Var output) const {
    if (output.tape != this) throw ContractError("backward: output belongs to another tape");
    if (value(output).size() != 1) throw ContractError("backward: output must be a scalar");

    std::vector<Matrix> grad(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        grad[i] = Matrix::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
    grad[static_cast<std::size_t>(output.id)](0, 0) = 1.0;

    for (int id = output.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.op == Op::Leaf) continue;
        const Matrix& g = grad[static_cast<std::size_t>(id)];
        if (g.isZero(0.0)) continue;
        const Matrix& y = n.value;
        const Matrix& a = at(n.lhs);
        Matrix& ga = grad[static_cast<std::size_t>(n.lhs)];

        switch (n.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const Matrix& b = at(n.rhs);
            ga.noalias() += g * b.transpose();
            grad[static_cast<std::size_t>(n.rhs)].noalias() += a.transpose() * g;
            break;
        }
        case Op::MatMulTransB: {
            const Matrix& b = at(n.rhs);
            ga.noalias() += g * b;
            grad[static_cast<std::size_t>(n.rhs)].noalias() += g.transpose() * a;
            break;
        }
        case Op::Transpose:
            ga += g.transpose();
            break;
        case Op::Add:
            ga += g;
            grad[static_cast<std::size_t>(n.rhs)] += g;
            break;
        case Op::Sub:
            ga += g;
            grad[static_cast<std::size_t>(n.rhs)] -= g;
            break;
        case Op::Mul: {
            const Matrix& b = at(n.rhs);
            ga += g.cwiseProduct(b);
            grad[static_cast<std::size_t>(n.rhs)] += g.cwiseProduct(a);
            break;
        }
        case Op::AddRowBroadcast:
            ga += g;
            grad[static_cast<std::size_t>(n.rhs)] += g.colwise().sum();
            break;
        case Op::Scale:
            ga += n.scalar * g;
            break;
        case Op::Relu:
            // Exact zeros take the symmetric subgradient 1/2.
            ga += (a.array() > 0.0).select(g, (a.array() == 0.0).select(0.5 * g, 0.0));
            break;
        case Op::Log:
            ga += g.cwiseQuotient(a);
            break;
        case Op::Exp:
            ga += g.cwiseProduct(y);
            break;
        case Op::Mean:
            ga.array() += g(0, 0) / static_cast<double>(a.size());
            break;
        case Op::Sum:
            ga.array() += g(0, 0);
            break;
        case Op::Softmax: {
            // dx = y * (dy - <dy, y>) / temperature, per slice
            const double inv_t = 1.0 / n.scalar;
            if (n.axis == 1) {
                for (Index i = 0; i < y.rows(); ++i) {
                    const double dot = g.row(i).dot(y.row(i));
                    ga.row(i).array() += inv_t * y.row(i).array() * (g.row(i).array() - dot);
                }
            } else {
                for (Index j = 0; j < y.cols(); ++j) {
                    const double dot = g.col(j).dot(y.col(j));
                    ga.col(j).array() += inv_t * y.col(j).array() * (g.col(j).array() - dot);
                }
            }
            break;
        }
        case Op::KlDivergence: {
            const Matrix& q = at(n.rhs);
            Matrix& gq = grad[static_cast<std::size_t>(n.rhs)];
            for (Index r = 0; r < a.rows(); ++r) {
                for (Index c = 0; c < a.cols(); ++c) {
                    const double p = a(r, c);
                    if (p == 0.0) continue;
                    const double gs = g(n.axis == 1 ? r : c, 0);
                    gq(r, c) -= gs * p / q(r, c);
                    ga(r, c) += gs * (std::log(p / q(r, c)) + 1.0);
                }
            }
            break;
        }
        case Op::L2Normalize: {
            // dx = (dy - y <y, dy>) / |x|, per slice
            if (n.axis == 1) {
                for (Index i = 0; i < y.rows(); ++i) {
                    const double norm = a.row(i).norm();
                    const double dot = y.row(i).dot(g.row(i));
                    ga.row(i) += (g.row(i) - dot * y.row(i)) / norm;
                }
            } else {
                for (Index j = 0; j < y.cols(); ++j) {
                    const double norm = a.col(j).norm();
                    const double dot = y.col(j).dot(g.col(j));
                    ga.col(j) += (g.col(j) - dot * y.col(j)) / norm;
                }
            }
            break;
        }
        case Op::CrossEntropy: {
            const auto& labels = n.aux->labels;
            const Matrix probs = slr::softmax(a, 1, 1.0);
            const double w = g(0, 0) / static_cast<double>(a.rows());
            for (Index i = 0; i < a.rows(); ++i) {
                ga.row(i) += w * probs.row(i);
                ga(i, labels[static_cast<std::size_t>(i)]) -= w;
            }
            break;
        }
        case Op::GraphPropagate: {
            const Matrix& x = at(n.rhs);
            Matrix& gx = grad[static_cast<std::size_t>(n.rhs)];
            const Index nodes = a.rows();
            for (Index f = 0; f < x.rows() / nodes; ++f) {
                ga.noalias() += g.middleRows(f * nodes, nodes) * x.middleRows(f * nodes, nodes).transpose();
                gx.middleRows(f * nodes, nodes).noalias() += a.transpose() * g.middleRows(f * nodes, nodes);
            }
            break;
        }
        case Op::SegmentMean: {
            const auto& groups = n.aux->groups;
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const double w = 1.0 / static_cast<double>(groups[gi].size());
                for (Index r : groups[gi]) ga.row(r) += w * g.row(static_cast<Index>(gi));
            }
            break;
        }
        case Op::SelectRows: {
            const auto& rows = n.aux->rows;
            for (std::size_t i = 0; i < rows.size(); ++i) ga.row(rows[i]) += g.row(static_cast<Index>(i));
            break;
        }
        }
    }
    return Gradients(std::move(grad));
}

std::vector<Matrix> Tape::replay() const {
    std::vector<Matrix> values;
    values.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        if (n.op == Op::Leaf) {
            values.push_back(n.value);
            continue;
        }
        const Matrix* lhs = n.lhs >= 0 ? &values[static_cast<std::size_t>(n.lhs)] : nullptr;
        const Matrix* rhs = n.rhs >= 0 ? &values[static_cast<std::size_t>(n.rhs)] : nullptr;
        values.push_back(forward(n, lhs, rhs));
    }
    return values;
}

} // namespace slr::ad
