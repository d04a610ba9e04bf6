#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slr/skeleton/layout.hpp"

namespace slr {

struct LexiconOptions {
    /// Hand words with no side marker ("one hand", "the thumb") go to the
    /// dominant hand; right unless this is false.
    bool dominant_is_right = true;
};

/// Body parts a clause mentions:
///   hand/finger/thumb/palm/... -> left or right hand by side marker,
///   lip/tongue/mouth/teeth -> mouth, brow/cheek/eye/... -> face,
///   arm/shoulder/torso/... -> body.
/// "left"/"right" count as side markers only right before a hand word;
/// "other hand" is the non-dominant side; "both hands"/"two hands" tag both.
std::vector<Part> tag_parts(std::string_view clause, const LexiconOptions& options = {});

/// Splits text into action clauses at sentence punctuation, semicolons and "then".
std::vector<std::string> split_clauses(std::string_view text);

/// Synonym phrase substitutions applied by the mock generator.
const std::vector<std::pair<std::string, std::string>>& synonym_table();

} // namespace slr
