#include "slr/gsp/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slr/error.hpp"
#include "slr/text/text_encoder.hpp"

namespace slr {

namespace {

std::set<std::string> token_set(std::string_view s) {
    auto t = tokenize(s);
    return {t.begin(), t.end()};
}

} // namespace

KnowledgeBase::KnowledgeBase(std::vector<Passage> passages) : passages_(std::move(passages)) {
    std::set<std::string> seen;
    for (const Passage& p : passages_) {
        auto tokens = token_set(p.key);
        if (tokens.empty()) throw IoError("knowledge base: key '" + p.key + "' has no tokens");
        if (p.text.empty()) throw IoError("knowledge base: empty passage for key '" + p.key + "'");
        std::string fold;
        for (const auto& t : tokenize(p.key)) fold += t + ' ';
        if (!seen.insert(fold).second) throw IoError("knowledge base: duplicate key '" + p.key + "'");
        key_tokens_.push_back(std::move(tokens));
    }
}

KnowledgeBase KnowledgeBase::parse_jsonl(std::string_view jsonl) {
    std::vector<Passage> passages;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            passages.push_back({j.at("key").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("knowledge base: ") + e.what());
        }
    }
    return KnowledgeBase(std::move(passages));
}

KnowledgeBase KnowledgeBase::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_jsonl(ss.str());
}

std::vector<RetrievalHit> KnowledgeBase::retrieve(std::string_view query, std::size_t k) const {
    if (k < 1) throw ParameterError("retrieve: k must be at least 1");
    const auto q = token_set(query);
    std::vector<RetrievalHit> hits;
    for (std::size_t i = 0; i < passages_.size(); ++i) {
        const auto& key = key_tokens_[i];
        std::size_t common = 0;
        for (const auto& t : q) common += key.count(t);
        if (common == 0) continue;
        const double uni = static_cast<double>(q.size() + key.size() - common);
        hits.push_back({i, static_cast<double>(common) / uni, &passages_[i]});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const RetrievalHit& a, const RetrievalHit& b) { return a.score > b.score; });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

} // namespace slr
