#include "slr/skeleton/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "slr/instrumentation.hpp"
#include "slr/numerics/kernels.hpp"

namespace slr {

namespace {

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    }
    return m;
}

// Input rows ordered (sample, frame, joint); columns are the three channels.
Matrix stack_inputs(std::span<const SkeletonSequence> batch, Index joints) {
    if (batch.empty()) throw DimensionError("encoder: empty batch");
    const Index frames = batch.front().frames();
    Matrix x(static_cast<Index>(batch.size()) * frames * joints, SkeletonSequence::kChannels);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const SkeletonSequence& s = batch[b];
        if (s.joints() != joints) throw DimensionError("encoder: sequence joint count differs from layout");
        if (s.frames() != frames) throw DimensionError("encoder: all sequences in a batch need the same length");
        for (Index t = 0; t < frames; ++t) {
            for (Index j = 0; j < joints; ++j) {
                const Index row = (static_cast<Index>(b) * frames + t) * joints + j;
                for (Index c = 0; c < SkeletonSequence::kChannels; ++c) x(row, c) = s(c, j, t);
            }
        }
    }
    return x;
}

} // namespace

std::vector<std::vector<Index>> pooling_groups(Index samples, Index frames, Index joints,
                                               const std::vector<Index>& members) {
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(samples));
    for (Index b = 0; b < samples; ++b) {
        auto& g = groups[static_cast<std::size_t>(b)];
        g.reserve(static_cast<std::size_t>(frames) * members.size());
        for (Index t = 0; t < frames; ++t) {
            for (Index j : members) g.push_back((b * frames + t) * joints + j);
        }
    }
    return groups;
}

SkeletonEncoder::SkeletonEncoder(SkeletonLayout layout, EncoderConfig config)
    : layout_(std::move(layout)), config_(config) {
    if (config_.layers < 1 || config_.channels < 1 || config_.embed_dim < 1 || config_.num_classes < 1) {
        throw ParameterError("encoder: layers, channels, embed_dim and num_classes must be positive");
    }
    const Index n = layout_.joint_count();
    const Index c = config_.channels;
    const Index d = config_.embed_dim;
    adjacency_ = normalized_adjacency(layout_.edges(), n);

    std::mt19937_64 rng(config_.seed);
    Index in = SkeletonSequence::kChannels;
    for (Index l = 0; l < config_.layers; ++l) {
        params_.push_back({"theta_" + std::to_string(l), gaussian(rng, in, c, std::sqrt(2.0 / double(in)))});
        in = c;
    }
    for (Index l = 0; l < config_.layers; ++l) {
        params_.push_back({"adjacency_offset_" + std::to_string(l), Matrix::Zero(n, n)});
    }
    const double head = 1.0 / std::sqrt(double(c));
    params_.push_back({"global_proj_w", gaussian(rng, c, d, head)});
    params_.push_back({"global_proj_b", gaussian(rng, 1, d, 0.1)});
    params_.push_back({"part_proj_w", gaussian(rng, c, d, head)});
    params_.push_back({"part_proj_b", gaussian(rng, 1, d, 0.1)});
    params_.push_back({"cls_w", gaussian(rng, c, config_.num_classes, head)});
    params_.push_back({"cls_b", Matrix::Zero(1, config_.num_classes)});
}

std::size_t SkeletonEncoder::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return i;
    }
    throw ParameterError("encoder: no parameter named " + name);
}

Matrix& SkeletonEncoder::parameter(const std::string& name) { return params_[index_of(name)].value; }

SkeletonEncoder::Bound SkeletonEncoder::bind(ad::Tape& tape) const {
    Bound b;
    b.vars.reserve(params_.size());
    for (const Parameter& p : params_) b.vars.push_back(tape.parameter(p.value));
    return b;
}

ad::Var SkeletonEncoder::backbone(ad::Tape& tape, const Bound& bound, std::span<const SkeletonSequence> batch) const {
    ad::Var h = tape.constant(stack_inputs(batch, layout_.joint_count()));
    ad::Var base = tape.constant(adjacency_);
    const auto layers = static_cast<std::size_t>(config_.layers);
    for (std::size_t l = 0; l < layers; ++l) {
        ad::Var adjacency = base + bound.vars[layers + l];
        h = graph_conv_forward(adjacency, bound.vars[l], h);
    }
    return h;
}

SkeletonEncoder::BatchOutput SkeletonEncoder::forward(ad::Tape& tape, const Bound& bound,
                                                      std::span<const SkeletonSequence> batch,
                                                      bool with_parts) const {
    const auto var = [&](const char* name) { return bound.vars[index_of(name)]; };
    BatchOutput out;
    out.features = backbone(tape, bound, batch);

    const Index samples = static_cast<Index>(batch.size());
    const Index frames = batch.front().frames();
    const Index joints = layout_.joint_count();
    std::vector<Index> all(static_cast<std::size_t>(joints));
    for (Index j = 0; j < joints; ++j) all[static_cast<std::size_t>(j)] = j;

    out.pooled = tape.segment_mean(out.features, pooling_groups(samples, frames, joints, all));
    out.logits = tape.add_row_broadcast(tape.matmul(out.pooled, var("cls_w")), var("cls_b"));
    out.global = tape.l2_normalize(tape.add_row_broadcast(tape.matmul(out.pooled, var("global_proj_w")),
                                                          var("global_proj_b")),
                                   1);
    if (with_parts) {
        ++Instrumentation::part_branch_calls;
        for (Part p : kAllParts) {
            ad::Var pooled = tape.segment_mean(out.features, pooling_groups(samples, frames, joints, layout_.joints(p)));
            out.parts[static_cast<std::size_t>(p)] = tape.l2_normalize(
                tape.add_row_broadcast(tape.matmul(pooled, var("part_proj_w")), var("part_proj_b")), 1);
        }
    }
    return out;
}

EncodedSkeleton SkeletonEncoder::encode(const SkeletonSequence& seq) const {
    ad::Tape tape;
    const Bound bound = bind(tape);
    const BatchOutput out = forward(tape, bound, std::span(&seq, 1), true);
    EncodedSkeleton e;
    e.global = out.global.value().row(0).transpose();
    e.logits = out.logits.value().row(0).transpose();
    for (Part p : kAllParts) e.parts[static_cast<std::size_t>(p)] = out.parts[static_cast<std::size_t>(p)]->value().row(0).transpose();
    return e;
}

Matrix SkeletonEncoder::predict_logits(std::span<const SkeletonSequence> batch) const {
    ad::Tape tape;
    const Bound bound = bind(tape);
    return forward(tape, bound, batch, false).logits.value();
}

SkeletonEncoder SkeletonEncoder::permuted(const std::vector<Index>& perm) const {
    SkeletonEncoder out = *this;
    out.layout_ = layout_.permuted(perm);
    out.adjacency_ = normalized_adjacency(out.layout_.edges(), out.layout_.joint_count());
    const auto layers = static_cast<std::size_t>(config_.layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& src = params_[layers + l].value;
        Matrix& dst = out.params_[layers + l].value;
        for (Index i = 0; i < src.rows(); ++i) {
            for (Index j = 0; j < src.cols(); ++j) {
                dst(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = src(i, j);
            }
        }
    }
    return out;
}

double classify_loss(const Vector& logits, int label) {
    if (logits.size() == 0) throw DimensionError("classify_loss: empty logits");
    if (label < 0 || label >= logits.size()) throw LabelError("classify_loss: label out of range");
    const std::vector<int> labels{label};
    return cross_entropy(logits.transpose(), labels);
}

} // namespace slr
