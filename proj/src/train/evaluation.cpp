#include "slr/train/evaluation.hpp"

#include <algorithm>

#include "slr/error.hpp"
#include "slr/numerics/kernels.hpp"

namespace slr {

Index rank_of(const Eigen::Ref<const Vector>& scores, int label) {
    if (label < 0 || label >= scores.size()) throw LabelError("rank_of: label out of range");
    const double own = scores(label);
    Index rank = 0;
    for (Index c = 0; c < scores.size(); ++c) {
        if (scores(c) > own || (scores(c) == own && c < label)) ++rank;
    }
    return rank;
}

std::vector<int> predictions(const Matrix& scores) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i) {
        Index best = 0;
        for (Index c = 1; c < scores.cols(); ++c) {
            if (scores(i, c) > scores(i, best)) best = c;
        }
        out.push_back(static_cast<int>(best));
    }
    return out;
}

TopK topk_accuracy(const Matrix& scores, std::span<const int> labels) {
    if (static_cast<Index>(labels.size()) != scores.rows()) throw DimensionError("topk_accuracy: one label per row");
    if (labels.empty()) throw DimensionError("topk_accuracy: no rows");
    const Index k5 = std::min<Index>(5, scores.cols());
    std::size_t hit1 = 0, hit5 = 0;
    for (Index i = 0; i < scores.rows(); ++i) {
        const Vector row = scores.row(i).transpose();
        const Index r = rank_of(row, labels[static_cast<std::size_t>(i)]);
        hit1 += r < 1;
        hit5 += r < k5;
    }
    const auto n = static_cast<double>(labels.size());
    return {static_cast<double>(hit1) / n, static_cast<double>(hit5) / n};
}

Matrix predict_all(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips, Index chunk) {
    if (chunk < 1) throw ParameterError("predict_all: chunk must be positive");
    Matrix out(static_cast<Index>(clips.size()), model.config().num_classes);
    for (std::size_t start = 0; start < clips.size(); start += static_cast<std::size_t>(chunk)) {
        const auto n = std::min(clips.size() - start, static_cast<std::size_t>(chunk));
        out.middleRows(static_cast<Index>(start), static_cast<Index>(n)) = model.predict_logits(clips.subspan(start, n));
    }
    return out;
}

std::vector<int> labels_of(std::span<const SkeletonSequence> clips) {
    std::vector<int> out;
    for (const auto& c : clips) out.push_back(c.label());
    return out;
}

TopK evaluate(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips) {
    return topk_accuracy(predict_all(model, clips), labels_of(clips));
}

Matrix class_scores(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips) {
    return softmax(predict_all(model, clips), 1, 1.0);
}

FusionResult fuse_streams(std::span<const Matrix> stream_scores, std::span<const int> labels) {
    if (stream_scores.empty()) throw ParameterError("fuse_streams: no streams");
    Matrix sum = stream_scores.front();
    for (std::size_t s = 1; s < stream_scores.size(); ++s) {
        if (stream_scores[s].rows() != sum.rows() || stream_scores[s].cols() != sum.cols()) {
            throw DimensionError("fuse_streams: score matrices differ in shape");
        }
        sum += stream_scores[s];
    }
    if (static_cast<Index>(labels.size()) != sum.rows()) throw DimensionError("fuse_streams: one label per row");
    FusionResult out;
    out.predictions = predictions(sum);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += out.predictions[i] == labels[i];
    out.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
    return out;
}

} // namespace slr
