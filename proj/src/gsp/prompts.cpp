#include "slr/gsp/prompts.hpp"

#include <algorithm>
#include <array>

#include "slr/error.hpp"

namespace slr {

namespace {

const std::array<PromptTemplate, 4> kTemplates{{
    {PromptId::P1,
     "You assist sign language teachers. Using only the reference passages below, describe how to "
     "perform the sign \"{gloss}\" as a sequence of physical actions: handshape, location, movement "
     "and facial expression.\n"
     "Reference passages:\n{passages}\n"
     "Description:"},
    {PromptId::P2,
     "Describe how to perform the sign \"{gloss}\" again in different words (variant {variant}). "
     "Keep every handshape, location and movement; change only the phrasing.\n"
     "Description:"},
    {PromptId::P3,
     "Rewrite the sign description below so that it stands on its own. Replace every reference to "
     "another sign or to a manual-alphabet letter with the matching expert passage, and drop any "
     "sentence that explains meaning, homophones or origin instead of an action.\n"
     "Expert passages:\n{passages}\n"
     "Description: {text}\n"
     "Rewritten:"},
    {PromptId::P4,
     "Split the sign description below into short action clauses. Start each line with the body "
     "parts the clause involves, chosen from body, left_hand, right_hand, mouth, face, in the form "
     "'part[,part]: clause'. One clause per line.\n"
     "Description: {text}\n"
     "Clauses:"},
}};

} // namespace

std::string_view prompt_name(PromptId id) {
    static constexpr std::string_view names[] = {"P1", "P2", "P3", "P4"};
    return names[static_cast<int>(id)];
}

std::vector<std::string> PromptTemplate::slots() const {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string::npos) {
        const auto end = text.find('}', pos);
        if (end == std::string::npos) break;
        out.push_back(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

std::string PromptTemplate::fill(const std::map<std::string, std::string>& values) const {
    const auto names = slots();
    for (const auto& [name, _] : values) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw PipelineError(std::string(prompt_name(id)), "template has no slot {" + name + "}");
        }
    }
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find('{', pos);
        if (open == std::string::npos) break;
        const auto close = text.find('}', open);
        if (close == std::string::npos) break;
        const auto name = text.substr(open + 1, close - open - 1);
        const auto it = values.find(name);
        if (it == values.end()) throw PipelineError(std::string(prompt_name(id)), "missing value for {" + name + "}");
        out.append(text, pos, open - pos);
        out += it->second;
        pos = close + 1;
    }
    out.append(text, pos);
    return out;
}

const PromptTemplate& prompt_template(PromptId id) { return kTemplates[static_cast<std::size_t>(id)]; }

} // namespace slr
