#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slr/numerics/grad_check.hpp"
#include "slr/numerics/tape.hpp"
#include "slr/skeleton/encoder.hpp"
#include "slr/train/config.hpp"
#include "slr/train/descriptions.hpp"
#include "slr/train/synthetic.hpp"

namespace slr {

inline constexpr const char* kMetricsHeader =
    "epoch,loss_cls,loss_con_multi,loss_total,train_top1,eval_top1,eval_top5";

struct EpochMetrics {
    int epoch = 0;
    double loss_cls = 0.0;
    double loss_con = 0.0; // 0 when no contrastive term is enabled
    double loss_total = 0.0;
    double train_top1 = 0.0;
    double eval_top1 = 0.0;
    double eval_top5 = 0.0;
};

struct RunMetrics {
    std::vector<EpochMetrics> epochs;
    std::optional<double> fused_top1;

    /// Header line then one row per epoch; numbers printed with 17 significant digits.
    std::string to_csv() const;
    void write_csv(const std::string& path) const;
};

/// Frozen text features. Recomputed on every request unless caching is on.
class TextFeatureSource {
public:
    static constexpr std::uint64_t kDefaultSeed = 0x7E47ull;

    TextFeatureSource(Index dim, bool cache, std::uint64_t seed = kDefaultSeed);
    const Vector& operator()(const std::string& text);
    Index dim() const noexcept { return dim_; }

private:
    Index dim_;
    bool cache_;
    std::uint64_t seed_;
    Vector scratch_;
    std::map<std::string, Vector> memo_;
};

struct ObjectiveTerms {
    ad::Var cls;
    std::optional<ad::Var> con; // mean of the evaluated contrastive terms
    ad::Var total;
    ad::Var logits;
    int contrastive_terms = 0;
};

/// Records L_cls + alpha * L_con_multi for one batch. Texts are gathered only
/// for classes present in the batch. `synonym_offset` rotates which synonym
/// each sample is paired with.
ObjectiveTerms batch_objective(ad::Tape& tape, const SkeletonEncoder& model, const SkeletonEncoder::Bound& bound,
                               std::span<const SkeletonSequence> batch, const std::vector<ClassTexts>& texts,
                               const TrainConfig& config, TextFeatureSource& text_features, int synonym_offset = 0);

EncoderConfig encoder_config(const TrainConfig& config);

/// The configured stream applied to every clip of both splits.
Dataset stream_view(const Dataset& data, const SkeletonLayout& layout, Stream stream);

struct TrainResult {
    SkeletonEncoder model;
    RunMetrics metrics;
};

/// Mini-batch SGD with weight decay over `data.train` (already in the wanted
/// stream); evaluates on `data.test` after each epoch. Throws TrainingDivergence
/// with epoch and batch on a non-finite loss.
TrainResult train(const TrainConfig& config, const SkeletonLayout& layout, const Dataset& data,
                  const std::vector<ClassTexts>& texts);

/// Finite-difference check of the full objective over every encoder tensor on a
/// 4-clip, 2-class batch whose classes move all five parts. Uses a narrow
/// encoder so the check runs in seconds.
GradCheckReport objective_grad_check(std::uint64_t seed, double eps = 1e-5);

} // namespace slr
