#include "slr/skeleton/sequence.hpp"

#include <algorithm>
#include <string>

#include "slr/error.hpp"

namespace slr {

SkeletonSequence::SkeletonSequence(Tensor values, int label) : values_(std::move(values)), label_(label) {
    if (values_.rank() != 3 || values_.dim(0) != kChannels) {
        throw DimensionError("skeleton sequence: expected a 3 x N x T tensor");
    }
    if (values_.dim(2) < 2) throw DimensionError("skeleton sequence: need at least two frames");
    for (Index j = 0; j < joints(); ++j) {
        for (Index t = 0; t < frames(); ++t) {
            const double c = values_(kConfidence, j, t);
            if (c < 0.0 || c > 1.0) throw DimensionError("skeleton sequence: confidence outside [0, 1]");
        }
    }
    if (label_ < 0) throw LabelError("skeleton sequence: negative label");
}

SkeletonSequence bone_stream(const SkeletonSequence& seq, const SkeletonLayout& layout) {
    const Index n = seq.joints(), frames = seq.frames();
    if (layout.joint_count() != n) throw LayoutError("bone_stream: layout joint count differs from sequence");
    std::vector<Index> parent(static_cast<std::size_t>(n), -1);
    for (const auto& [from, to] : layout.edges()) {
        if (parent[static_cast<std::size_t>(to)] < 0) parent[static_cast<std::size_t>(to)] = from;
    }
    Tensor out({SkeletonSequence::kChannels, n, frames});
    for (Index j = 0; j < n; ++j) {
        const Index p = parent[static_cast<std::size_t>(j)];
        for (Index t = 0; t < frames; ++t) {
            if (p < 0) {
                out.set(SkeletonSequence::kConfidence, j, t, seq(SkeletonSequence::kConfidence, j, t));
                continue;
            }
            out.set(SkeletonSequence::kX, j, t, seq(SkeletonSequence::kX, j, t) - seq(SkeletonSequence::kX, p, t));
            out.set(SkeletonSequence::kY, j, t, seq(SkeletonSequence::kY, j, t) - seq(SkeletonSequence::kY, p, t));
            out.set(SkeletonSequence::kConfidence, j, t,
                    std::min(seq(SkeletonSequence::kConfidence, j, t), seq(SkeletonSequence::kConfidence, p, t)));
        }
    }
    return SkeletonSequence(std::move(out), seq.label());
}

SkeletonSequence motion_stream(const SkeletonSequence& seq) {
    const Index n = seq.joints(), frames = seq.frames();
    Tensor out({SkeletonSequence::kChannels, n, frames});
    for (Index j = 0; j < n; ++j) {
        for (Index t = 0; t < frames; ++t) {
            out.set(SkeletonSequence::kConfidence, j, t, seq(SkeletonSequence::kConfidence, j, t));
            if (t + 1 == frames) continue;
            for (Index c : {SkeletonSequence::kX, SkeletonSequence::kY}) {
                out.set(c, j, t, seq(c, j, t + 1) - seq(c, j, t));
            }
        }
    }
    return SkeletonSequence(std::move(out), seq.label());
}

const char* stream_name(Stream s) {
    switch (s) {
    case Stream::Joint: return "joint";
    case Stream::Bone: return "bone";
    case Stream::JointMotion: return "joint_motion";
    case Stream::BoneMotion: return "bone_motion";
    }
    return "?";
}

Stream parse_stream(std::string_view name) {
    for (Stream s : {Stream::Joint, Stream::Bone, Stream::JointMotion, Stream::BoneMotion}) {
        if (name == stream_name(s)) return s;
    }
    throw ParameterError("unknown stream '" + std::string(name) + "'");
}

SkeletonSequence apply_stream(const SkeletonSequence& seq, const SkeletonLayout& layout, Stream s) {
    switch (s) {
    case Stream::Joint: return seq;
    case Stream::Bone: return bone_stream(seq, layout);
    case Stream::JointMotion: return motion_stream(seq);
    case Stream::BoneMotion: return motion_stream(bone_stream(seq, layout));
    }
    return seq;
}

} // namespace slr
