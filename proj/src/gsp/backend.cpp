#include "slr/gsp/backend.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "slr/error.hpp"
#include "slr/text/text_encoder.hpp"

namespace slr {

namespace {

// Whole-word replacement of every occurrence.
void replace_all(std::string& s, const std::string& from, const std::string& to) {
    auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        const bool starts = pos == 0 || !word_char(s[pos - 1]);
        const bool ends = pos + from.size() == s.size() || !word_char(s[pos + from.size()]);
        if (!starts || !ends) {
            pos += from.size();
            continue;
        }
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string fallback_description(const std::string& gloss) {
    return "Perform the " + gloss + " sign with one hand in front of the chest.";
}

} // namespace

MockBackend::MockBackend(std::uint64_t seed, const KnowledgeBase* memory, LexiconOptions lexicon)
    : seed_(seed), memory_(memory), lexicon_(lexicon) {}

std::string MockBackend::generate(const GenerationRequest& request) {
    switch (request.prompt) {
    case PromptId::P1:
        return request.passages.empty() ? fallback_description(request.gloss) : request.passages.front();
    case PromptId::P2:
        return synonym(request);
    case PromptId::P3:
        return request.text;
    case PromptId::P4: {
        std::string out;
        for (const auto& clause : split_clauses(request.text)) {
            const auto parts = tag_parts(clause, lexicon_);
            if (parts.empty()) continue;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                if (i) out += ',';
                out += part_name(parts[i]);
            }
            out += ": " + clause + "\n";
        }
        return out;
    }
    }
    throw PipelineError("mock", "unknown prompt");
}

std::string MockBackend::synonym(const GenerationRequest& request) const {
    std::string text = fallback_description(request.gloss);
    if (memory_ != nullptr) {
        const auto hits = memory_->retrieve(request.gloss, 1);
        if (!hits.empty() && hits.front().score == 1.0) text = hits.front().passage->text;
    }

    const auto& table = synonym_table();
    std::vector<std::size_t> order(table.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed_ ^ stable_hash(request.gloss) ^
                        (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(request.variant + 1)));
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution apply(0.6);
    for (std::size_t i : order) {
        if (!apply(rng)) continue;
        const auto& [from, to] = table[i];
        replace_all(text, from, to);
        replace_all(text, capitalized(from), capitalized(to));
    }

    static const char* const lead_ins[] = {"", "To sign this, ", "For this sign, ", "In this sign, "};
    const std::string lead = lead_ins[static_cast<std::size_t>(request.variant) % 4];
    if (!lead.empty() && !text.empty() && !(text.size() > 1 && std::isupper(static_cast<unsigned char>(text[1])))) {
        text[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(text[0])));
    }
    return lead + text;
}

HttpBackend::HttpBackend(std::string url, double timeout_seconds, int retries)
    : timeout_seconds_(timeout_seconds), retries_(retries) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ParameterError("http backend: url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (timeout_seconds_ <= 0) throw ParameterError("http backend: timeout must be positive");
    if (retries_ < 0) throw ParameterError("http backend: retries must be nonnegative");
}

std::string HttpBackend::request_body(const GenerationRequest& request) {
    nlohmann::ordered_json j;
    j["template_id"] = prompt_name(request.prompt);
    j["filled_prompt"] = request.filled_prompt;
    return j.dump();
}

std::string HttpBackend::parse_response(const std::string& body) {
    try {
        return nlohmann::json::parse(body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError("http", std::string("malformed response: ") + e.what());
    }
}

std::string HttpBackend::generate(const GenerationRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto secs = static_cast<time_t>(timeout_seconds_);
    const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    const std::string body = request_body(request);
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        auto res = client.Post(path_, body, "application/json");
        if (res && res->status == 200) return parse_response(res->body);
        last_error = res ? "HTTP status " + std::to_string(res->status) : httplib::to_string(res.error());
    }
    throw PipelineError("http", "request failed after " + std::to_string(retries_ + 1) + " attempts: " + last_error);
}

} // namespace slr
