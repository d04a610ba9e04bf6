#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slr/gsp/knowledge_base.hpp"
#include "slr/gsp/records.hpp"
#include "slr/train/synthetic.hpp"

namespace slr {

std::string synthetic_gloss(int class_id);

/// Expert-style text for one class, one sentence per active part. Hand
/// sentences refer to a manual-alphabet handshape by name.
std::string synthetic_description(const SyntheticSignSpec& spec);

/// One passage per class keyed by its gloss, plus the handshape passages the
/// class descriptions refer to.
KnowledgeBase synthetic_knowledge_base(const std::vector<SyntheticSignSpec>& specs);

std::vector<SignEntry> synthetic_corpus(const std::vector<SyntheticSignSpec>& specs);

struct DescriptionSet {
    std::vector<DescriptionRecord> records;
    std::vector<std::string> warnings;
};

/// Runs the four-stage pipeline with the offline backend over the synthetic corpus.
DescriptionSet build_description_set(const std::vector<SyntheticSignSpec>& specs, int synonym_count,
                                     std::uint64_t seed);

/// Per-class view used by training.
struct ClassTexts {
    int class_id = 0;
    std::string refined;
    std::vector<std::string> synonyms;
    std::vector<DescriptionRecord> parts;
};

/// Throws LabelError when a class in [0, num_classes) lacks a refined text, or
/// when a record's class id is out of range.
std::vector<ClassTexts> group_descriptions(const std::vector<DescriptionRecord>& records, int num_classes);

} // namespace slr
