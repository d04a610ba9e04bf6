#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "slr/skeleton/layout.hpp"

namespace slr {

struct SignEntry {
    int class_id = 0;
    std::string gloss;
};

enum class DescriptionKind { Primary, Synonym, Refined, Part };
enum class DescriptionSource { Generated, Expert, Mock };

std::string_view kind_name(DescriptionKind k);
DescriptionKind parse_kind(std::string_view s);
std::string_view source_name(DescriptionSource s);
DescriptionSource parse_source(std::string_view s);

struct DescriptionRecord {
    int class_id = 0;
    DescriptionKind kind = DescriptionKind::Primary;
    std::string text;
    std::vector<Part> parts; // non-empty iff kind == Part
    DescriptionSource source = DescriptionSource::Mock;

    friend bool operator==(const DescriptionRecord&, const DescriptionRecord&) = default;
};

/// Throws PipelineError when the record breaks its invariants.
void validate(const DescriptionRecord& r);

std::string to_jsonl(const DescriptionRecord& r);
DescriptionRecord parse_record(std::string_view line);

std::vector<SignEntry> read_corpus(const std::string& path);
std::vector<SignEntry> parse_corpus(std::string_view jsonl);
void write_records(const std::string& path, const std::vector<DescriptionRecord>& records);
std::vector<DescriptionRecord> read_records(const std::string& path);

} // namespace slr
