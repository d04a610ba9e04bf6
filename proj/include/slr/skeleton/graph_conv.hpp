#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "slr/error.hpp"
#include "slr/numerics/tape.hpp"
#include "slr/skeleton/layout.hpp"

namespace slr {

/// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I. Edges are
/// treated as undirected; duplicates collapse to a single unit entry.
template <typename Scalar = double>
MatrixX<Scalar> normalized_adjacency(const std::vector<Edge>& edges, Index n) {
    if (n <= 0) throw LayoutError("normalized_adjacency: node count must be positive");
    MatrixX<Scalar> a = MatrixX<Scalar>::Identity(n, n);
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n) throw LayoutError("normalized_adjacency: endpoint out of range");
        a(i, j) = Scalar(1);
        a(j, i) = Scalar(1);
    }
    const VectorX<Scalar> inv_sqrt_degree = a.rowwise().sum().array().rsqrt();
    return inv_sqrt_degree.asDiagonal() * a * inv_sqrt_degree.asDiagonal();
}

/// One plain graph convolution: weights Theta and a fixed normalized adjacency.
struct GraphConvLayer {
    Matrix theta;
    Matrix adjacency;
};

/// relu(A X Theta) for X stacked as blocks of N rows (one block per frame).
inline ad::Var graph_conv_forward(ad::Var adjacency, ad::Var theta, ad::Var features) {
    ad::Tape& tape = *features.tape;
    if (features.cols() != theta.rows()) {
        throw DimensionError("graph_conv_forward: feature width " + std::to_string(features.cols()) +
                             " does not match weights " + std::to_string(theta.rows()));
    }
    return tape.relu(tape.graph_propagate(adjacency, tape.matmul(features, theta)));
}

inline ad::Var graph_conv_forward(ad::Tape& tape, const GraphConvLayer& layer, ad::Var features) {
    return graph_conv_forward(tape.constant(layer.adjacency), tape.parameter(layer.theta), features);
}

} // namespace slr
