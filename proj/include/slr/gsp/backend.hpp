#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "slr/gsp/knowledge_base.hpp"
#include "slr/gsp/lexicon.hpp"
#include "slr/gsp/prompts.hpp"
#include "slr/gsp/records.hpp"

namespace slr {

/// Everything a generator sees for one call. `filled_prompt` is what a live
/// model receives; the structured fields let the mock act deterministically.
struct GenerationRequest {
    PromptId prompt = PromptId::P1;
    std::string filled_prompt;
    std::string gloss;
    std::string text;
    std::vector<std::string> passages;
    int variant = 0;
};

class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    /// Throws on failure; the pipeline rethrows with the stage tag.
    virtual std::string generate(const GenerationRequest& request) = 0;
    virtual DescriptionSource source() const = 0;
};

/// Deterministic template/substitution generator.
///   P1: top retrieved passage, or a generic action sentence when nothing was retrieved.
///   P2: its own memory of the gloss (exact-key passage of `memory`) rewritten with
///       the synonym table in a seeded order, plus a variant lead-in.
///   P3: returns the already resolved text unchanged.
///   P4: lexicon-tagged clauses as "part[,part]: clause" lines.
class MockBackend : public GeneratorBackend {
public:
    explicit MockBackend(std::uint64_t seed, const KnowledgeBase* memory = nullptr, LexiconOptions lexicon = {});

    std::string generate(const GenerationRequest& request) override;
    DescriptionSource source() const override { return DescriptionSource::Mock; }

private:
    std::string synonym(const GenerationRequest& request) const;

    std::uint64_t seed_;
    const KnowledgeBase* memory_;
    LexiconOptions lexicon_;
};

/// POSTs {"template_id", "filled_prompt"} as JSON and reads {"text"}.
class HttpBackend : public GeneratorBackend {
public:
    HttpBackend(std::string url, double timeout_seconds, int retries);

    std::string generate(const GenerationRequest& request) override;
    DescriptionSource source() const override { return DescriptionSource::Generated; }

    static std::string request_body(const GenerationRequest& request);
    static std::string parse_response(const std::string& body);

private:
    std::string scheme_host_port_;
    std::string path_;
    double timeout_seconds_;
    int retries_;
};

} // namespace slr
