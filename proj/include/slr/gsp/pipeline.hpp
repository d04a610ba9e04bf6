#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slr/gsp/backend.hpp"
#include "slr/gsp/knowledge_base.hpp"
#include "slr/gsp/lexicon.hpp"
#include "slr/gsp/records.hpp"

namespace slr {

struct PipelineOptions {
    std::size_t retrieve_k = 3;
    int synonym_count = 2;
    /// Sentences containing any of these phrases (case-insensitive) are dropped
    /// during refinement as non-action content.
    std::vector<std::string> non_action_filters{"homophonous", "homophone", "homophonic", "represents",
                                                "symbolizes", "is derived from", "meaning of", "means "};
    /// Passes of reference resolution; resolved passages may themselves refer to other signs.
    int max_resolution_rounds = 4;
    LexiconOptions lexicon;
};

/// A substituted reference found in a description.
struct SignReference {
    enum class Kind { Sign, ManualAlphabet };
    Kind kind;
    std::string name;    // text inside the quotes
    std::size_t begin;   // replacement span in the scanned text
    std::size_t end;
    std::string query() const;
};

/// Quoted sign names ("the sign for 'love'", "identical to the sign 'good'") and
/// manual-alphabet references ("the manual sign 'Q'", "the '5' handshape").
/// Spans start at the beginning of the enclosing clause.
std::vector<SignReference> find_references(std::string_view text);

/// Curly and TeX-style quotes folded to ASCII.
std::string normalize_quotes(std::string_view text);

struct RefineResult {
    DescriptionRecord record;
    int substitutions = 0;
    std::vector<std::string> warnings;
};

struct PipelineOutput {
    std::vector<DescriptionRecord> records;
    std::vector<std::string> warnings;
};

/// Four-stage description generation over a read-only knowledge base.
class GspPipeline {
public:
    GspPipeline(const KnowledgeBase& kb, GeneratorBackend& backend, PipelineOptions options = {});

    DescriptionRecord generate_primary(const SignEntry& entry) const;
    std::vector<DescriptionRecord> generate_synonyms(const SignEntry& entry, int count) const;
    RefineResult refine(const DescriptionRecord& primary) const;
    std::vector<DescriptionRecord> decompose_parts(const DescriptionRecord& refined) const;

    /// Per sign: primary, synonyms, refined, parts, in corpus order.
    PipelineOutput run(std::span<const SignEntry> corpus) const;

    const PipelineOptions& options() const noexcept { return options_; }

private:
    std::string call(const char* stage, GenerationRequest request) const;
    std::string drop_non_action(std::string_view text) const;

    const KnowledgeBase& kb_;
    GeneratorBackend& backend_;
    PipelineOptions options_;
};

} // namespace slr
