#include "slr/text/text_encoder.hpp"

#include <cctype>
#include <map>
#include <random>

#include "slr/error.hpp"
#include "slr/gsp/records.hpp"
#include "slr/instrumentation.hpp"

namespace slr {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

Vector encode_text(std::string_view text, Index dim, std::uint64_t seed) {
    if (dim < 8) throw ParameterError("encode_text: dimension must be at least 8");
    ++Instrumentation::text_encoder_calls;
    std::map<std::string, int> counts;
    for (auto& t : tokenize(text)) ++counts[std::move(t)];
    if (counts.empty()) throw EncodingError("encode_text: no tokens in '" + std::string(text) + "'");

    Vector sum = Vector::Zero(dim);
    for (const auto& [token, count] : counts) {
        std::mt19937_64 rng(stable_hash(token) ^ seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        for (Index k = 0; k < dim; ++k) sum(k) += count * dist(rng);
    }
    return sum / sum.norm();
}

std::vector<TextFeature> encode_batch(std::span<const DescriptionRecord> records, Index dim, std::uint64_t seed) {
    std::vector<TextFeature> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) out.push_back({encode_text(records[i].text, dim, seed), i});
    return out;
}

} // namespace slr
