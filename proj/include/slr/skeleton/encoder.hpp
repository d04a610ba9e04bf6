#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slr/numerics/tape.hpp"
#include "slr/skeleton/graph_conv.hpp"
#include "slr/skeleton/layout.hpp"
#include "slr/skeleton/sequence.hpp"

namespace slr {

struct EncoderConfig {
    Index layers = 3;
    Index channels = 64;
    Index embed_dim = 256;
    int num_classes = 10;
    std::uint64_t seed = 1;
};

struct Parameter {
    std::string name;
    Matrix value;
};

/// Global feature, five part features (all unit length) and class logits for one sample.
struct EncodedSkeleton {
    Vector global;
    std::array<Vector, kPartCount> parts;
    Vector logits;
};

/// Stacked graph convolutions over every frame, mean pooled over frames and
/// joints. Each layer uses the fixed normalized adjacency plus a learnable
/// additive offset. Global and part heads are separate affine projections
/// followed by L2 normalization; the classifier reads the pooled global
/// feature before projection.
class SkeletonEncoder {
public:
    SkeletonEncoder(SkeletonLayout layout, EncoderConfig config);

    const SkeletonLayout& layout() const noexcept { return layout_; }
    const EncoderConfig& config() const noexcept { return config_; }
    const Matrix& adjacency() const noexcept { return adjacency_; }

    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    Matrix& parameter(const std::string& name);

    /// Parameters registered on a tape, in `parameters()` order.
    struct Bound {
        std::vector<ad::Var> vars;
    };
    Bound bind(ad::Tape& tape) const;

    struct BatchOutput {
        ad::Var features;   // last layer, (B*T*N) x C
        ad::Var pooled;     // B x C, before projection
        ad::Var global;     // B x d, unit rows
        ad::Var logits;     // B x classes
        std::array<std::optional<ad::Var>, kPartCount> parts; // B x d, unit rows
    };

    /// Records the forward pass. Part heads are evaluated only when `with_parts`.
    BatchOutput forward(ad::Tape& tape, const Bound& bound, std::span<const SkeletonSequence> batch,
                        bool with_parts) const;

    EncodedSkeleton encode(const SkeletonSequence& seq) const;

    /// Inference path: global logits only, no part branch. Rows follow `batch`.
    Matrix predict_logits(std::span<const SkeletonSequence> batch) const;

    /// Same encoder with joint j renamed to perm[j] in layout and weights.
    SkeletonEncoder permuted(const std::vector<Index>& perm) const;

private:
    ad::Var backbone(ad::Tape& tape, const Bound& bound, std::span<const SkeletonSequence> batch) const;
    std::size_t index_of(const std::string& name) const;

    SkeletonLayout layout_;
    EncoderConfig config_;
    Matrix adjacency_;
    std::vector<Parameter> params_;
};

/// Softmax cross-entropy of one logit row against `label`.
double classify_loss(const Vector& logits, int label);

/// One row group per sample covering `members` in every frame, for features
/// stacked as (sample, frame, joint) rows.
std::vector<std::vector<Index>> pooling_groups(Index samples, Index frames, Index joints,
                                               const std::vector<Index>& members);

} // namespace slr
