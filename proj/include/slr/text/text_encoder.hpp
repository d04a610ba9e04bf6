#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slr/numerics/tensor.hpp"

namespace slr {

struct DescriptionRecord;

/// Lowercase, replace every non-alphanumeric byte with a separator, split.
std::vector<std::string> tokenize(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t stable_hash(std::string_view s);

struct TextFeature {
    Vector vector;
    std::size_t record = 0; // index into the encoded record list
};

/// Frozen hashed bag-of-tokens encoder: every token maps to a seeded Gaussian
/// direction, directions are summed by token count and normalized.
Vector encode_text(std::string_view text, Index dim, std::uint64_t seed);

std::vector<TextFeature> encode_batch(std::span<const DescriptionRecord> records, Index dim, std::uint64_t seed);

} // namespace slr
