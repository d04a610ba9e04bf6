#include "doctest.h"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include "slr/gsp/backend.hpp"
#include "slr/gsp/knowledge_base.hpp"
#include "slr/gsp/lexicon.hpp"
#include "slr/gsp/pipeline.hpp"
#include "slr/gsp/prompts.hpp"
#include "slr/gsp/records.hpp"
#include "slr/text/text_encoder.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>
#include <json.hpp>

using namespace slr;

namespace {

KnowledgeBase fixture_kb() { return KnowledgeBase::load(std::string(SLR_DATA_DIR) + "/kb_fixture.jsonl"); }

DescriptionRecord primary(std::string text, int class_id = 0) {
    return {class_id, DescriptionKind::Primary, std::move(text), {}, DescriptionSource::Mock};
}

std::set<Part> as_set(const std::vector<Part>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("retrieval ranking matches brute-force Jaccard scoring") {
    const KnowledgeBase kb({{"thumb up", "a"}, {"index finger circle", "b"}, {"flat hand", "c"},
                            {"thumb index pinch", "d"}, {"cheek touch", "e"}});
    const std::string query = "thumb index";
    const auto hits = kb.retrieve(query, 5);

    std::vector<std::pair<double, std::size_t>> oracle;
    const auto q = tokenize(query);
    const std::set<std::string> qs(q.begin(), q.end());
    for (std::size_t i = 0; i < kb.size(); ++i) {
        const auto k = tokenize(kb.passages()[i].key);
        const std::set<std::string> ks(k.begin(), k.end());
        std::size_t inter = 0;
        for (const auto& t : qs) inter += ks.count(t);
        const double score = double(inter) / double(qs.size() + ks.size() - inter);
        if (score > 0) oracle.push_back({score, i});
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) { return a.first > b.first; });
    REQUIRE(hits.size() == oracle.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].index == oracle[i].second);
        CHECK(hits[i].score == doctest::Approx(oracle[i].first).epsilon(1e-15));
    }
    CHECK(kb.retrieve(query, 1).size() == 1);
    CHECK(KnowledgeBase().retrieve(query, 3).empty());
}

TEST_CASE("knowledge base keys must be unique after folding") {
    CHECK_THROWS(KnowledgeBase(std::vector<Passage>{{"Love", "a"}, {"love!", "b"}}));
    CHECK(fixture_kb().size() >= 20);
}

TEST_CASE("refining the love reference inserts the expert passage") {
    const KnowledgeBase kb = fixture_kb();
    MockBackend backend(1);
    const GspPipeline pipeline(kb, backend);
    const RefineResult r = pipeline.refine(primary("Make the sign for 'love'."));
    CHECK(r.record.text.find("Gently caress the back of the thumb") != std::string::npos);
    CHECK(r.substitutions == 1);
    CHECK(r.warnings.empty());
    CHECK(r.record.kind == DescriptionKind::Refined);

    const RefineResult tex = pipeline.refine(primary("Make the sign for ``love''."));
    CHECK(tex.record.text == r.record.text);
}

TEST_CASE("manual alphabet references resolve against the manual sign entry") {
    const KnowledgeBase kb = fixture_kb();
    MockBackend backend(1);
    const GspPipeline pipeline(kb, backend);
    const auto r = pipeline.refine(primary("One hand forms the manual sign 'Q', placed at the nostrils."));
    CHECK(r.record.text.rfind("One hand with the right thumb down", 0) == 0);
    CHECK(r.record.text.find("placed at the nostrils") != std::string::npos);
    CHECK(r.record.text.find("'Q'") == std::string::npos);
}

TEST_CASE("two references with one resolvable give one substitution and one warning") {
    const KnowledgeBase kb = fixture_kb();
    MockBackend backend(1);
    const GspPipeline pipeline(kb, backend);
    const std::string text = "Make the sign for 'love'. Then make the sign for 'zebra' near the chin.";
    REQUIRE(find_references(text).size() == 2);
    const auto r = pipeline.refine(primary(text));
    CHECK(r.substitutions == 1);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("zebra") != std::string::npos);
    CHECK(r.record.text.find("the sign for 'zebra'") != std::string::npos);
}

TEST_CASE("references nested in resolved passages are resolved too, and meaning sentences dropped") {
    const KnowledgeBase kb = fixture_kb();
    MockBackend backend(1);
    const GspPipeline pipeline(kb, backend);
    const auto r = pipeline.refine(primary("Make the sign for 'idea'."));
    CHECK(r.record.text.find("Extend the index finger of one hand upward") != std::string::npos);
    CHECK(r.record.text.find("homophonous") == std::string::npos);
    CHECK(r.substitutions == 2);
}

TEST_CASE("refinement is a fixpoint on reference-free text") {
    const KnowledgeBase kb = fixture_kb();
    MockBackend backend(1);
    const GspPipeline pipeline(kb, backend);
    for (const auto& p : kb.passages()) {
        if (!find_references(p.text).empty()) continue;
        const auto once = pipeline.refine(primary(p.text));
        auto again_in = once.record;
        again_in.kind = DescriptionKind::Primary;
        CHECK(pipeline.refine(again_in).record.text == once.record.text);
    }
}

TEST_CASE("lexicon tagging") {
    CHECK(as_set(tag_parts("Extend your index finger with one hand")) == std::set{Part::RightHand});
    CHECK(as_set(tag_parts("press cheek with thumb")) == std::set{Part::Face, Part::RightHand});
    CHECK(as_set(tag_parts("place it on the palm of the other hand")) == std::set{Part::LeftHand});
    CHECK(as_set(tag_parts("raise the left hand")) == std::set{Part::LeftHand});
    CHECK(as_set(tag_parts("clap both hands")) == std::set{Part::LeftHand, Part::RightHand});
    CHECK(as_set(tag_parts("open the lips and shrug the shoulders")) == std::set{Part::Mouth, Part::Body});
    CHECK(as_set(tag_parts("Extend your index finger with one hand", {false})) == std::set{Part::LeftHand});
    CHECK(tag_parts("slowly and gently").empty());
    CHECK(split_clauses("Bend the fingers; press the cheek. Then pinch the thumb").size() == 3);
}

TEST_CASE("prompt templates fill exactly their slots") {
    const PromptTemplate& p1 = prompt_template(PromptId::P1);
    const auto slots = p1.slots();
    CHECK(std::set<std::string>(slots.begin(), slots.end()) == std::set<std::string>{"gloss", "passages"});
    const std::string filled = p1.fill({{"gloss", "love"}, {"passages", "- x\n"}});
    CHECK(filled.find("{") == std::string::npos);
    CHECK(filled.find("love") != std::string::npos);
    CHECK_THROWS(p1.fill({{"gloss", "love"}}));
    CHECK_THROWS(p1.fill({{"gloss", "love"}, {"passages", ""}, {"extra", ""}}));
    for (PromptId id : {PromptId::P2, PromptId::P3, PromptId::P4}) CHECK(!prompt_template(id).slots().empty());
}

TEST_CASE("records JSONL round trip and validation") {
    const DescriptionRecord r{3, DescriptionKind::Part, "press \"cheek\"", {Part::Face, Part::RightHand},
                              DescriptionSource::Generated};
    const std::string line = to_jsonl(r);
    CHECK(line == R"({"class_id":3,"kind":"part","text":"press \"cheek\"","parts":["face","right_hand"],"source":"generated"})");
    CHECK(parse_record(line) == r);
    CHECK_THROWS_AS(validate({0, DescriptionKind::Part, "x", {}, DescriptionSource::Mock}), PipelineError);
    CHECK_THROWS_AS(validate({0, DescriptionKind::Primary, " ", {}, DescriptionSource::Mock}), PipelineError);
    CHECK_THROWS(parse_record(R"({"class_id":0,"kind":"other","text":"x","parts":[],"source":"mock"})"));
    CHECK_THROWS(parse_corpus("{\"class_id\":0,\"gloss\":\"a\"}\n{\"class_id\":0,\"gloss\":\"b\"}\n"));
}

TEST_CASE("pipeline over the fixture corpus is complete and deterministic") {
    const KnowledgeBase kb = fixture_kb();
    const auto corpus = read_corpus(std::string(SLR_DATA_DIR) + "/corpus_fixture.jsonl");
    MockBackend a(7, &kb), b(7, &kb);
    const auto out1 = GspPipeline(kb, a).run(corpus);
    const auto out2 = GspPipeline(kb, b).run(corpus);
    CHECK(out1.records == out2.records);

    std::string j1, j2;
    for (const auto& r : out1.records) j1 += to_jsonl(r) + "\n";
    for (const auto& r : out2.records) j2 += to_jsonl(r) + "\n";
    CHECK(j1 == j2);

    for (const auto& entry : corpus) {
        std::map<DescriptionKind, int> kinds;
        for (const auto& r : out1.records) {
            if (r.class_id == entry.class_id) ++kinds[r.kind];
        }
        CHECK(kinds[DescriptionKind::Primary] == 1);
        CHECK(kinds[DescriptionKind::Synonym] >= 1);
        CHECK(kinds[DescriptionKind::Refined] == 1);
        CHECK(kinds[DescriptionKind::Part] >= 1);
    }
    for (const auto& r : out1.records) {
        if (r.kind == DescriptionKind::Part) CHECK(!r.parts.empty());
        if (r.kind == DescriptionKind::Refined) CHECK(find_references(r.text).empty());
    }
}

TEST_CASE("mock synonyms apply the substitution table") {
    const KnowledgeBase kb(std::vector<Passage>{{"push", "The palm pushes forward."}});
    MockBackend backend(3, &kb);
    bool substituted = false;
    for (int v = 0; v < 8; ++v) {
        GenerationRequest req;
        req.prompt = PromptId::P2;
        req.gloss = "push";
        req.variant = v;
        const std::string s = backend.generate(req);
        substituted |= s.find("arm extends with palm facing outward") != std::string::npos;
    }
    CHECK(substituted);
}

TEST_CASE("backend failures carry the stage tag") {
    struct Failing : GeneratorBackend {
        std::string generate(const GenerationRequest&) override { throw std::runtime_error("down"); }
        DescriptionSource source() const override { return DescriptionSource::Generated; }
    } failing;
    const KnowledgeBase kb = fixture_kb();
    const GspPipeline pipeline(kb, failing);
    try {
        pipeline.generate_primary({0, "love"});
        FAIL("expected a pipeline error");
    } catch (const PipelineError& e) {
        CHECK(e.stage() == "primary");
    }
}

TEST_CASE("http backend request body and response parsing") {
    GenerationRequest req;
    req.prompt = PromptId::P3;
    req.filled_prompt = "Rewrite \"this\"";
    CHECK(HttpBackend::request_body(req) == R"({"template_id":"P3","filled_prompt":"Rewrite \"this\""})");
    CHECK(HttpBackend::parse_response(R"({"text":"ok","extra":1})") == "ok");
    CHECK_THROWS_AS(HttpBackend::parse_response("{}"), PipelineError);
    CHECK_THROWS_AS(HttpBackend::parse_response("not json"), PipelineError);
    CHECK_THROWS_AS(HttpBackend("localhost:80", 1.0, 0), ParameterError);
}

TEST_CASE("http backend talks to a live endpoint and retries") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Post("/gen", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"text", "echo " + body.at("template_id").get<std::string>()}}.dump(),
                        "application/json");
    });
    server.Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"text":"finally"})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    GenerationRequest req;
    req.prompt = PromptId::P4;
    req.filled_prompt = "split";
    CHECK(HttpBackend(base + "/gen", 2.0, 0).generate(req) == "echo P4");
    CHECK(HttpBackend(base + "/flaky", 2.0, 2).generate(req) == "finally");
    calls = 0;
    CHECK_THROWS_AS(HttpBackend(base + "/flaky", 2.0, 1).generate(req), PipelineError);

    server.stop();
    worker.join();
}
