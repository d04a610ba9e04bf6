#include "slr/train/ablation.hpp"

#include <cstdio>

namespace slr {

const std::vector<AblationVariant>& ablation_variants() {
    static const std::vector<AblationVariant> variants{
        {"baseline", false, false, false},
        {"+synonym", true, false, false},
        {"+prompt", false, true, false},
        {"+multipart", false, false, true},
        {"all", true, true, true},
    };
    return variants;
}

std::vector<AblationRow> run_ablation(const TrainConfig& base, const SkeletonLayout& layout, const Dataset& data,
                                      const std::vector<ClassTexts>& texts) {
    std::vector<AblationRow> rows;
    for (const auto& v : ablation_variants()) {
        TrainConfig cfg = base;
        cfg.use_synonym = v.use_synonym;
        cfg.use_global = v.use_global;
        cfg.use_parts = v.use_parts;
        const TrainResult result = train(cfg, layout, data, texts);
        rows.push_back({v, result.metrics.epochs.back()});
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = std::string(kAblationHeader) + "\n";
    char buf[512];
    for (const auto& r : rows) {
        const auto& m = r.final;
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.variant.name.c_str(),
                      r.variant.use_synonym, r.variant.use_global, r.variant.use_parts, m.loss_cls, m.loss_con,
                      m.loss_total, m.train_top1, m.eval_top1, m.eval_top5);
        out += buf;
    }
    return out;
}

} // namespace slr
