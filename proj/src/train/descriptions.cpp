#include "slr/train/descriptions.hpp"

#include "slr/error.hpp"
#include "slr/gsp/backend.hpp"
#include "slr/gsp/pipeline.hpp"

namespace slr {

namespace {

constexpr const char* kLetters = "ABCDE";

const char* speed_word(double frequency) {
    if (frequency < 1.5) return "slowly";
    if (frequency < 2.5) return "steadily";
    return "quickly";
}

const char* size_word(double amplitude) {
    if (amplitude < 0.17) return "small";
    if (amplitude < 0.35) return "medium";
    return "big";
}

const char* height_phrase(double offset_y) {
    if (offset_y > 0.1) return "held high";
    if (offset_y < -0.1) return "held low";
    return "at mid height";
}

char handshape_letter(const SyntheticSignSpec& spec, Part hand) {
    return kLetters[(static_cast<std::size_t>(spec.class_id) + static_cast<std::size_t>(hand)) % 5];
}

} // namespace

std::string synthetic_gloss(int class_id) { return "gloss" + std::to_string(class_id); }

std::string synthetic_description(const SyntheticSignSpec& spec) {
    std::string out;
    auto sentence = [&](const std::string& s) { out += (out.empty() ? "" : " ") + s + "."; };
    for (Part p : kAllParts) {
        if (!spec.is_active(p)) continue;
        const PartMotion& m = spec[p];
        const std::string speed = speed_word(m.frequency);
        const std::string size = size_word(m.amplitude);
        const std::string height = height_phrase(m.offset_y);
        switch (p) {
        case Part::Body:
            sentence("Sway the shoulders " + speed + " in a " + size + " arc " + height);
            break;
        case Part::LeftHand:
        case Part::RightHand: {
            const std::string side = p == Part::LeftHand ? "left" : "right";
            sentence("With the " + side + " hand, form the manual sign '" + std::string(1, handshape_letter(spec, p)) +
                     "' and move it " + speed + " in a " + size + " circle " + height);
            break;
        }
        case Part::Mouth:
            sentence("Open the lips " + speed + " in a " + size + " rhythm");
            break;
        case Part::Face:
            sentence("Raise the eyebrows " + speed + " with a " + size + " lift");
            break;
        }
    }
    sentence("This sign represents " + synthetic_gloss(spec.class_id));
    return out;
}

KnowledgeBase synthetic_knowledge_base(const std::vector<SyntheticSignSpec>& specs) {
    std::vector<Passage> passages{
        {"manual sign A", "Close the fingers into a fist with the thumb resting against the side of the index finger."},
        {"manual sign B", "Hold the fingers straight and together with the thumb folded across the palm."},
        {"manual sign C", "Curve the fingers and thumb into the shape of a half circle."},
        {"manual sign D", "Touch the thumb to the middle finger with the index finger pointing upward."},
        {"manual sign E", "Bend the fingertips down to rest on the thumb tucked under them."},
    };
    for (const auto& s : specs) passages.push_back({synthetic_gloss(s.class_id), synthetic_description(s)});
    return KnowledgeBase(std::move(passages));
}

std::vector<SignEntry> synthetic_corpus(const std::vector<SyntheticSignSpec>& specs) {
    std::vector<SignEntry> out;
    for (const auto& s : specs) out.push_back({s.class_id, synthetic_gloss(s.class_id)});
    return out;
}

DescriptionSet build_description_set(const std::vector<SyntheticSignSpec>& specs, int synonym_count,
                                     std::uint64_t seed) {
    const KnowledgeBase kb = synthetic_knowledge_base(specs);
    MockBackend backend(seed, &kb);
    PipelineOptions options;
    options.synonym_count = synonym_count;
    GspPipeline pipeline(kb, backend, options);
    const auto corpus = synthetic_corpus(specs);
    PipelineOutput result = pipeline.run(corpus);
    return {std::move(result.records), std::move(result.warnings)};
}

std::vector<ClassTexts> group_descriptions(const std::vector<DescriptionRecord>& records, int num_classes) {
    std::vector<ClassTexts> out(static_cast<std::size_t>(num_classes));
    std::vector<bool> has_refined(out.size(), false);
    for (std::size_t c = 0; c < out.size(); ++c) out[c].class_id = static_cast<int>(c);
    for (const auto& r : records) {
        if (r.class_id < 0 || r.class_id >= num_classes) {
            throw LabelError("descriptions: class id " + std::to_string(r.class_id) + " outside [0, " +
                             std::to_string(num_classes) + ")");
        }
        auto& c = out[static_cast<std::size_t>(r.class_id)];
        switch (r.kind) {
        case DescriptionKind::Primary:
            break;
        case DescriptionKind::Synonym:
            c.synonyms.push_back(r.text);
            break;
        case DescriptionKind::Refined:
            c.refined = r.text;
            has_refined[static_cast<std::size_t>(r.class_id)] = true;
            break;
        case DescriptionKind::Part:
            c.parts.push_back(r);
            break;
        }
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (!has_refined[c]) throw LabelError("descriptions: class " + std::to_string(c) + " has no refined text");
    }
    return out;
}

} // namespace slr
