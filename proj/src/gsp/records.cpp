#include "slr/gsp/records.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slr/error.hpp"

namespace slr {

namespace {

constexpr std::string_view kKinds[] = {"primary", "synonym", "refined", "part"};
constexpr std::string_view kSources[] = {"generated", "expert", "mock"};

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view kind_name(DescriptionKind k) { return kKinds[static_cast<int>(k)]; }

DescriptionKind parse_kind(std::string_view s) {
    for (int i = 0; i < 4; ++i) {
        if (kKinds[i] == s) return static_cast<DescriptionKind>(i);
    }
    throw ParameterError("unknown description kind '" + std::string(s) + "'");
}

std::string_view source_name(DescriptionSource s) { return kSources[static_cast<int>(s)]; }

DescriptionSource parse_source(std::string_view s) {
    for (int i = 0; i < 3; ++i) {
        if (kSources[i] == s) return static_cast<DescriptionSource>(i);
    }
    throw ParameterError("unknown description source '" + std::string(s) + "'");
}

void validate(const DescriptionRecord& r) {
    if (r.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw PipelineError(std::string(kind_name(r.kind)), "empty description text");
    }
    const bool is_part = r.kind == DescriptionKind::Part;
    if (is_part == r.parts.empty()) {
        throw PipelineError(std::string(kind_name(r.kind)), "part tags must be present exactly on part records");
    }
    std::set<Part> seen(r.parts.begin(), r.parts.end());
    if (seen.size() != r.parts.size()) throw PipelineError("part", "duplicate part tag");
}

std::string to_jsonl(const DescriptionRecord& r) {
    nlohmann::ordered_json j;
    j["class_id"] = r.class_id;
    j["kind"] = kind_name(r.kind);
    j["text"] = r.text;
    j["parts"] = nlohmann::ordered_json::array();
    for (Part p : r.parts) j["parts"].push_back(part_name(p));
    j["source"] = source_name(r.source);
    return j.dump();
}

DescriptionRecord parse_record(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        DescriptionRecord r;
        r.class_id = j.at("class_id").get<int>();
        r.kind = parse_kind(j.at("kind").get<std::string>());
        r.text = j.at("text").get<std::string>();
        for (const auto& p : j.at("parts")) {
            const auto part = parse_part(p.get<std::string>());
            if (!part) throw ParameterError("unknown part tag '" + p.get<std::string>() + "'");
            r.parts.push_back(*part);
        }
        r.source = parse_source(j.at("source").get<std::string>());
        validate(r);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("description record: ") + e.what());
    }
}

std::vector<SignEntry> parse_corpus(std::string_view jsonl) {
    std::vector<SignEntry> out;
    std::set<int> ids;
    for (const auto& line : lines_of(jsonl)) {
        try {
            const auto j = nlohmann::json::parse(line);
            SignEntry e{j.at("class_id").get<int>(), j.at("gloss").get<std::string>()};
            if (!ids.insert(e.class_id).second) {
                throw IoError("corpus: duplicate class_id " + std::to_string(e.class_id));
            }
            if (e.gloss.empty()) throw IoError("corpus: empty gloss");
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw IoError(std::string("corpus: ") + ex.what());
        }
    }
    return out;
}

std::vector<SignEntry> read_corpus(const std::string& path) { return parse_corpus(slurp(path)); }

void write_records(const std::string& path, const std::vector<DescriptionRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& r : records) out << to_jsonl(r) << '\n';
}

std::vector<DescriptionRecord> read_records(const std::string& path) {
    std::vector<DescriptionRecord> out;
    for (const auto& line : lines_of(slurp(path))) out.push_back(parse_record(line));
    return out;
}

} // namespace slr
