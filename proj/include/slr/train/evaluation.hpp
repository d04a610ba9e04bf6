#pragma once

#include <span>
#include <vector>

#include "slr/skeleton/encoder.hpp"

namespace slr {

struct TopK {
    double top1 = 0.0;
    double top5 = 0.0;
};

/// Rank of `label` in a score row: classes scoring higher, plus equal-scoring
/// classes with a smaller id.
Index rank_of(const Eigen::Ref<const Vector>& scores, int label);

/// Argmax per row, ties to the smallest class id.
std::vector<int> predictions(const Matrix& scores);

/// Top-1 and top-min(5, classes) accuracy of score rows against labels.
TopK topk_accuracy(const Matrix& scores, std::span<const int> labels);

/// Global logits of every clip, computed in chunks. Uses only the inference path.
Matrix predict_all(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips, Index chunk = 32);

TopK evaluate(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips);

/// Row softmax of the logits; the per-stream input to fusion.
Matrix class_scores(const SkeletonEncoder& model, std::span<const SkeletonSequence> clips);

std::vector<int> labels_of(std::span<const SkeletonSequence> clips);

struct FusionResult {
    std::vector<int> predictions;
    double accuracy = 0.0;
};

/// Elementwise sum of per-stream score matrices, then argmax.
FusionResult fuse_streams(std::span<const Matrix> stream_scores, std::span<const int> labels);

} // namespace slr
