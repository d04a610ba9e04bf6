#include "slr/gsp/lexicon.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "slr/text/text_encoder.hpp"

namespace slr {

namespace {

const std::set<std::string> kHandWords{"hand",   "hands",    "finger",  "fingers", "fingertip", "fingertips",
                                       "thumb",  "thumbs",   "palm",    "palms",   "index",     "fist",
                                       "fists",  "knuckle",  "knuckles", "wrist",  "wrists",    "handshape"};
const std::set<std::string> kMouthWords{"lip", "lips", "tongue", "mouth", "teeth"};
const std::set<std::string> kFaceWords{"brow",     "brows",  "eyebrow", "eyebrows", "cheek", "cheeks", "eye",
                                       "eyes",     "forehead", "nose",  "nostril",  "nostrils", "chin", "face"};
const std::set<std::string> kBodyWords{"arm",   "arms",  "shoulder", "shoulders", "torso",
                                       "chest", "elbow", "elbows",   "body"};

bool any_of_set(const std::vector<std::string>& tokens, const std::set<std::string>& words) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return words.count(t) > 0; });
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n,");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n,");
    return s.substr(first, last - first + 1);
}

} // namespace

std::vector<Part> tag_parts(std::string_view clause, const LexiconOptions& options) {
    const auto tokens = tokenize(clause);
    const Part dominant = options.dominant_is_right ? Part::RightHand : Part::LeftHand;
    const Part other = options.dominant_is_right ? Part::LeftHand : Part::RightHand;
    std::set<Part> found;

    if (any_of_set(tokens, kHandWords)) {
        bool marked = false;
        auto hand_follows = [&](std::size_t i) {
            return (i + 1 < tokens.size() && kHandWords.count(tokens[i + 1])) ||
                   (i + 2 < tokens.size() && kHandWords.count(tokens[i + 2]));
        };
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& t = tokens[i];
            if (t == "left" && hand_follows(i)) {
                found.insert(Part::LeftHand);
                marked = true;
            } else if (t == "right" && hand_follows(i)) {
                found.insert(Part::RightHand);
                marked = true;
            } else if (t == "other" && hand_follows(i)) {
                found.insert(other);
                marked = true;
            } else if (t == "one" && hand_follows(i)) {
                found.insert(dominant);
                marked = true;
            } else if ((t == "both" || t == "two") && i + 1 < tokens.size() &&
                       (tokens[i + 1] == "hands" || tokens[i + 1] == "palms")) {
                found.insert(Part::LeftHand);
                found.insert(Part::RightHand);
                marked = true;
            }
        }
        if (!marked) found.insert(dominant);
    }
    if (any_of_set(tokens, kMouthWords)) found.insert(Part::Mouth);
    if (any_of_set(tokens, kFaceWords)) found.insert(Part::Face);
    if (any_of_set(tokens, kBodyWords)) found.insert(Part::Body);
    return {found.begin(), found.end()};
}

std::vector<std::string> split_clauses(std::string_view text) {
    static const std::regex then_boundary(R"(\s*,?\s*\b(?:and\s+)?then\b\s*)", std::regex::icase);
    const std::string marked = std::regex_replace(std::string(text), then_boundary, "\n");
    std::vector<std::string> out;
    std::string cur;
    for (char ch : marked) {
        if (ch == '.' || ch == ';' || ch == '!' || ch == '?' || ch == '\n') {
            if (auto c = trim(cur); !c.empty()) out.push_back(std::move(c));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (auto c = trim(cur); !c.empty()) out.push_back(std::move(c));
    return out;
}

const std::vector<std::pair<std::string, std::string>>& synonym_table() {
    static const std::vector<std::pair<std::string, std::string>> table{
        {"palm pushes forward", "arm extends with palm facing outward"},
        {"raise it upwards", "lift it up"},
        {"raise", "lift"},
        {"extend", "stretch out"},
        {"gently", "softly"},
        {"place it on", "rest it on"},
        {"big circle", "large circle"},
        {"quickly", "rapidly"},
        {"slowly", "at an unhurried pace"},
        {"move", "shift"},
        {"small", "compact"},
        {"touch", "make contact with"},
        {"pointing", "directed"},
        {"rhythmically", "in a steady rhythm"},
        {"open", "part"},
    };
    return table;
}

} // namespace slr
