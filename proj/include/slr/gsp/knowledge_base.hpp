#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slr {

struct Passage {
    std::string key;
    std::string text;
};

struct RetrievalHit {
    std::size_t index = 0;
    double score = 0.0;
    const Passage* passage = nullptr;
};

/// Expert passages indexed by the token set of their key phrase.
class KnowledgeBase {
public:
    KnowledgeBase() = default;
    /// Keys must stay unique after case and punctuation folding.
    explicit KnowledgeBase(std::vector<Passage> passages);

    static KnowledgeBase parse_jsonl(std::string_view jsonl);
    static KnowledgeBase load(const std::string& path);

    /// Top-k passages by Jaccard overlap between query tokens and key tokens.
    /// Ties keep passage order; zero-overlap passages are never returned.
    std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k) const;

    const std::vector<Passage>& passages() const noexcept { return passages_; }
    std::size_t size() const noexcept { return passages_.size(); }
    bool empty() const noexcept { return passages_.empty(); }

private:
    std::vector<Passage> passages_;
    std::vector<std::set<std::string>> key_tokens_;
};

} // namespace slr
