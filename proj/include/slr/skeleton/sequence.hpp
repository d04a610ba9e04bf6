#pragma once

#include "slr/numerics/tensor.hpp"
#include "slr/skeleton/layout.hpp"

namespace slr {

/// One sample: channels (x, y, confidence) x joints x frames, plus its class.
class SkeletonSequence {
public:
    static constexpr Index kChannels = 3;
    static constexpr Index kX = 0, kY = 1, kConfidence = 2;

    SkeletonSequence(Tensor values, int label);

    const Tensor& values() const noexcept { return values_; }
    int label() const noexcept { return label_; }
    Index joints() const { return values_.dim(1); }
    Index frames() const { return values_.dim(2); }
    double operator()(Index channel, Index joint, Index frame) const { return values_(channel, joint, frame); }

    friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;

private:
    Tensor values_;
    int label_ = 0;
};

/// Child minus parent coordinates along each oriented edge. A joint's parent is
/// the source of the first edge that targets it; joints without a parent get a
/// zero vector. Confidence is the smaller of the two endpoint confidences.
SkeletonSequence bone_stream(const SkeletonSequence& seq, const SkeletonLayout& layout);

/// Frame t+1 minus frame t; the last frame is zero. Confidence is copied.
SkeletonSequence motion_stream(const SkeletonSequence& seq);

enum class Stream { Joint, Bone, JointMotion, BoneMotion };

const char* stream_name(Stream s);
Stream parse_stream(std::string_view name);
SkeletonSequence apply_stream(const SkeletonSequence& seq, const SkeletonLayout& layout, Stream s);

} // namespace slr
