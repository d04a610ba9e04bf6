#include "doctest.h"

#include <cmath>

#include "slr/error.hpp"
#include "slr/gsp/records.hpp"
#include "slr/instrumentation.hpp"
#include "slr/text/text_encoder.hpp"

using namespace slr;

TEST_CASE("tokenize folds case and punctuation") {
    const std::vector<std::string> want{"press", "cheek", "with", "the", "thumb", "2x"};
    CHECK(tokenize("Press CHEEK, with the thumb -- 2x!") == want);
    CHECK(tokenize(" ,.; ").empty());
}

TEST_CASE("stable hash is 64-bit FNV-1a") {
    CHECK(stable_hash("") == 0xcbf29ce484222325ull);
    CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cull);
    CHECK(stable_hash("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("encodings are unit length, deterministic and order free") {
    const Vector a = encode_text("Extend the thumb with one hand", 64, 5);
    CHECK(std::abs(a.norm() - 1.0) < 1e-9);
    CHECK(a == encode_text("Extend the thumb with one hand", 64, 5));
    CHECK(a == encode_text("hand one with THUMB the extend.", 64, 5));
    CHECK(a != encode_text("Extend the thumb with one hand", 64, 6));
    CHECK_THROWS_AS(encode_text("?!", 64, 5), EncodingError);
    CHECK_THROWS_AS(encode_text("hand", 7, 5), ParameterError);
}

TEST_CASE("repeating a token only changes its weight") {
    const Index d = 32;
    const Vector ea = encode_text("palm", d, 9), eb = encode_text("cheek", d, 9);
    // "palm cheek" is proportional to |g_a| ea + |g_b| eb; recover the ratio, then
    // "palm palm cheek" must point along 2 |g_a| ea + |g_b| eb.
    Matrix basis(d, 2);
    basis << ea, eb;
    const Vector coef = basis.colPivHouseholderQr().solve(encode_text("palm cheek", d, 9));
    const Vector predicted = (2.0 * coef(0) * ea + coef(1) * eb).normalized();
    CHECK((encode_text("palm palm cheek", d, 9) - predicted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("texts with disjoint tokens are nearly orthogonal at d = 512") {
    int below = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const double c = encode_text("bend the fingers", 512, seed).dot(encode_text("press cheek lightly", 512, seed));
        below += std::abs(c) < 0.2;
    }
    CHECK(below >= 990);
}

TEST_CASE("encode_batch keeps order and counts calls") {
    const std::vector<DescriptionRecord> records{
        {0, DescriptionKind::Refined, "raise the eyebrows", {}, DescriptionSource::Mock},
        {1, DescriptionKind::Part, "open the lips", {Part::Mouth}, DescriptionSource::Mock},
    };
    const long before = Instrumentation::text_encoder_calls.load();
    const auto feats = encode_batch(records, 16, 3);
    CHECK(Instrumentation::text_encoder_calls.load() - before == 2);
    REQUIRE(feats.size() == 2);
    CHECK(feats[1].record == 1);
    CHECK(feats[1].vector == encode_text("open the lips", 16, 3));
}
