#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slr {

/// P1 primary (retrieval grounded), P2 synonym, P3 refine (retrieval grounded), P4 part split.
enum class PromptId { P1, P2, P3, P4 };

std::string_view prompt_name(PromptId id);

struct PromptTemplate {
    PromptId id;
    std::string text; // slots written as {name}

    std::vector<std::string> slots() const;

    /// Substitutes every slot. Each slot must be supplied and every supplied
    /// value must name a slot of this template.
    std::string fill(const std::map<std::string, std::string>& values) const;
};

const PromptTemplate& prompt_template(PromptId id);

} // namespace slr
