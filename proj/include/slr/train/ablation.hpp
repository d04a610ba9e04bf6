#pragma once

#include <string>
#include <vector>

#include "slr/train/trainer.hpp"

namespace slr {

struct AblationVariant {
    std::string name;
    bool use_synonym = false;
    bool use_global = false; // refined prompt text against the global feature
    bool use_parts = false;
};

/// baseline, +synonym, +prompt, +multipart, all.
const std::vector<AblationVariant>& ablation_variants();

struct AblationRow {
    AblationVariant variant;
    EpochMetrics final;
};

/// One training run per variant on the same data, seed and schedule.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const SkeletonLayout& layout, const Dataset& data,
                                      const std::vector<ClassTexts>& texts);

inline constexpr const char* kAblationHeader =
    "variant,use_synonym,use_prompt,use_multipart,loss_cls,loss_con_multi,loss_total,train_top1,eval_top1,eval_top5";

std::string ablation_csv(const std::vector<AblationRow>& rows);

} // namespace slr
