#include "slr/gsp/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "slr/error.hpp"

namespace slr {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::size_t clause_start(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    while (i > 0) {
        const char c = text[i - 1];
        if (c == '.' || c == ';' || c == ',' || c == '!' || c == '?' || c == '\n' || c == '(' || c == ')') break;
        --i;
    }
    while (i < pos && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    return i;
}

std::string strip_final_period(std::string s) {
    s = trim(s);
    while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
    return s;
}

std::string format_passages(const std::vector<RetrievalHit>& hits) {
    std::string out;
    for (const auto& h : hits) out += "- [" + h.passage->key + "] " + h.passage->text + "\n";
    return out.empty() ? "(none)\n" : out;
}

} // namespace

std::string SignReference::query() const {
    return kind == Kind::ManualAlphabet ? "manual sign " + name : name;
}

std::string normalize_quotes(std::string_view text) {
    std::string s(text);
    const std::pair<const char*, const char*> folds[] = {
        {"\xE2\x80\x9C", "\""}, {"\xE2\x80\x9D", "\""}, {"\xE2\x80\x98", "'"}, {"\xE2\x80\x99", "'"},
        {"``", "\""},           {"''", "\""},
    };
    for (const auto& [from, to] : folds) {
        std::size_t pos = 0;
        const std::string f(from);
        while ((pos = s.find(f, pos)) != std::string::npos) {
            s.replace(pos, f.size(), to);
            pos += 1;
        }
    }
    return s;
}

std::vector<SignReference> find_references(std::string_view text) {
    static const std::regex manual(R"(the\s+manual\s+sign\s+(?:for\s+)?["']([^"']+)["'])", std::regex::icase);
    static const std::regex handshape(R"((?:the\s+)?["']([^"']+)["']\s+handshape)", std::regex::icase);
    static const std::regex sign(R"((?:identical\s+to\s+)?the\s+sign\s+(?:for\s+)?["']([^"']+)["'])",
                                 std::regex::icase);
    const std::string s(text);
    std::vector<SignReference> found;
    auto scan = [&](const std::regex& re, SignReference::Kind kind) {
        for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            const auto pos = static_cast<std::size_t>(m.position(0));
            found.push_back({kind, m[1].str(), clause_start(s, pos), pos + static_cast<std::size_t>(m.length(0))});
        }
    };
    scan(manual, SignReference::Kind::ManualAlphabet);
    scan(handshape, SignReference::Kind::ManualAlphabet);
    scan(sign, SignReference::Kind::Sign);
    std::sort(found.begin(), found.end(), [](const SignReference& a, const SignReference& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
    });
    std::vector<SignReference> out;
    for (auto& r : found) {
        if (!out.empty() && r.begin < out.back().end) continue;
        out.push_back(std::move(r));
    }
    return out;
}

GspPipeline::GspPipeline(const KnowledgeBase& kb, GeneratorBackend& backend, PipelineOptions options)
    : kb_(kb), backend_(backend), options_(std::move(options)) {
    if (options_.retrieve_k < 1) throw ParameterError("pipeline: retrieve_k must be at least 1");
    if (options_.max_resolution_rounds < 1) throw ParameterError("pipeline: need at least one resolution round");
}

std::string GspPipeline::call(const char* stage, GenerationRequest request) const {
    std::string out;
    try {
        out = backend_.generate(request);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(stage, e.what());
    }
    if (trim(out).empty()) throw PipelineError(stage, "backend returned empty text");
    return out;
}

DescriptionRecord GspPipeline::generate_primary(const SignEntry& entry) const {
    const auto hits = kb_.retrieve(entry.gloss, options_.retrieve_k);
    GenerationRequest req;
    req.prompt = PromptId::P1;
    req.gloss = entry.gloss;
    for (const auto& h : hits) req.passages.push_back(h.passage->text);
    req.filled_prompt = prompt_template(PromptId::P1).fill({{"gloss", entry.gloss}, {"passages", format_passages(hits)}});
    DescriptionRecord r{entry.class_id, DescriptionKind::Primary, trim(call("primary", std::move(req))), {},
                        backend_.source()};
    validate(r);
    return r;
}

std::vector<DescriptionRecord> GspPipeline::generate_synonyms(const SignEntry& entry, int count) const {
    if (count < 0) throw ParameterError("generate_synonyms: count must be nonnegative");
    std::vector<DescriptionRecord> out;
    for (int v = 0; v < count; ++v) {
        GenerationRequest req;
        req.prompt = PromptId::P2;
        req.gloss = entry.gloss;
        req.variant = v;
        req.filled_prompt = prompt_template(PromptId::P2).fill({{"gloss", entry.gloss}, {"variant", std::to_string(v + 1)}});
        out.push_back({entry.class_id, DescriptionKind::Synonym, trim(call("synonym", std::move(req))), {},
                       backend_.source()});
        validate(out.back());
    }
    return out;
}

std::string GspPipeline::drop_non_action(std::string_view text) const {
    std::vector<std::string_view> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const bool boundary = (c == '.' || c == '!' || c == '?') &&
                              (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
        if (!boundary) continue;
        std::size_t end = i + 1;
        while (end < text.size() && std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        sentences.push_back(text.substr(start, end - start));
        start = end;
        i = end - 1;
    }
    if (start < text.size()) sentences.push_back(text.substr(start));

    std::string out;
    bool dropped = false;
    for (auto s : sentences) {
        const std::string l = lower(s);
        const bool reject = std::any_of(options_.non_action_filters.begin(), options_.non_action_filters.end(),
                                        [&](const std::string& f) { return l.find(lower(f)) != std::string::npos; });
        if (reject) {
            dropped = true;
            continue;
        }
        out += s;
    }
    return dropped ? trim(out) : out;
}

RefineResult GspPipeline::refine(const DescriptionRecord& primary) const {
    if (primary.kind != DescriptionKind::Primary) throw PipelineError("refine", "input must be a primary description");
    RefineResult result;
    std::string text = normalize_quotes(primary.text);
    std::vector<std::string> used;
    std::set<std::string> unresolved;

    for (int round = 0; round < options_.max_resolution_rounds; ++round) {
        const auto refs = find_references(text);
        if (refs.empty()) break;
        unresolved.clear();
        std::string next;
        std::size_t cursor = 0;
        int replaced = 0;
        for (const auto& ref : refs) {
            const auto hits = kb_.retrieve(ref.query(), 1);
            next.append(text, cursor, ref.begin - cursor);
            if (!hits.empty() && hits.front().score == 1.0) {
                next += strip_final_period(hits.front().passage->text);
                used.push_back(hits.front().passage->text);
                ++replaced;
            } else {
                next.append(text, ref.begin, ref.end - ref.begin);
                unresolved.insert(ref.name);
            }
            cursor = ref.end;
        }
        next.append(text, cursor);
        text = std::move(next);
        result.substitutions += replaced;
        if (replaced == 0) break;
    }
    for (const auto& name : unresolved) {
        result.warnings.push_back("unresolved reference '" + name + "' kept verbatim");
    }

    const std::string filtered = drop_non_action(text);
    if (trim(filtered).empty()) throw PipelineError("refine", "no action content left after filtering");

    GenerationRequest req;
    req.prompt = PromptId::P3;
    req.text = filtered;
    req.passages = used;
    std::string passages;
    for (const auto& p : used) passages += "- " + p + "\n";
    req.filled_prompt = prompt_template(PromptId::P3).fill({{"passages", passages.empty() ? "(none)\n" : passages},
                                                            {"text", filtered}});
    result.record = {primary.class_id, DescriptionKind::Refined, call("refine", std::move(req)), {}, backend_.source()};
    validate(result.record);
    return result;
}

std::vector<DescriptionRecord> GspPipeline::decompose_parts(const DescriptionRecord& refined) const {
    if (refined.kind != DescriptionKind::Refined) {
        throw PipelineError("decompose", "input must be a refined description");
    }
    GenerationRequest req;
    req.prompt = PromptId::P4;
    req.text = refined.text;
    req.filled_prompt = prompt_template(PromptId::P4).fill({{"text", refined.text}});
    const std::string reply = call("decompose", std::move(req));

    std::vector<DescriptionRecord> out;
    std::size_t pos = 0;
    while (pos <= reply.size()) {
        auto nl = reply.find('\n', pos);
        if (nl == std::string::npos) nl = reply.size();
        const std::string line = trim(std::string_view(reply).substr(pos, nl - pos));
        pos = nl + 1;
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw PipelineError("decompose", "line without part prefix: " + line);
        std::set<Part> parts;
        std::string_view tags = std::string_view(line).substr(0, colon);
        while (!tags.empty()) {
            const auto comma = tags.find(',');
            const std::string tag = trim(tags.substr(0, comma));
            tags = comma == std::string_view::npos ? std::string_view{} : tags.substr(comma + 1);
            if (tag.empty()) continue;
            const auto p = parse_part(tag);
            if (!p) throw PipelineError("decompose", "unknown part tag '" + tag + "'");
            parts.insert(*p);
        }
        const std::string clause = trim(std::string_view(line).substr(colon + 1));
        if (clause.empty() || parts.empty()) continue;
        out.push_back({refined.class_id, DescriptionKind::Part, clause, {parts.begin(), parts.end()}, backend_.source()});
        validate(out.back());
    }
    return out;
}

PipelineOutput GspPipeline::run(std::span<const SignEntry> corpus) const {
    PipelineOutput out;
    for (const SignEntry& entry : corpus) {
        DescriptionRecord primary = generate_primary(entry);
        auto synonyms = generate_synonyms(entry, options_.synonym_count);
        RefineResult refined = refine(primary);
        auto parts = decompose_parts(refined.record);
        if (parts.empty()) {
            // Nothing lexically tagged: the whole description goes to the dominant hand.
            auto tags = tag_parts(refined.record.text, options_.lexicon);
            if (tags.empty()) tags = {options_.lexicon.dominant_is_right ? Part::RightHand : Part::LeftHand};
            parts.push_back({entry.class_id, DescriptionKind::Part, refined.record.text, tags, backend_.source()});
            out.warnings.push_back("class " + std::to_string(entry.class_id) + ": no tagged clause, whole text used");
        }
        for (auto& w : refined.warnings) out.warnings.push_back("class " + std::to_string(entry.class_id) + ": " + w);

        out.records.push_back(std::move(primary));
        for (auto& s : synonyms) out.records.push_back(std::move(s));
        out.records.push_back(std::move(refined.record));
        for (auto& p : parts) out.records.push_back(std::move(p));
    }
    return out;
}

} // namespace slr
