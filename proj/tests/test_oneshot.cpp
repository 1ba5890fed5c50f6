#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ooc/errors.hpp"
#include "ooc/oneshot.hpp"

using namespace ooc;

namespace {

DetectionRecord fake_face_a() {
    return canonicalize({{"Human", 99.60},
                         {"Person", 99.60},
                         {"Face", 99.60},
                         {"Decor", 63.50},
                         {"Finger", 61.10},
                         {"Tie", 55.3}},
                        "fake-a");
}

std::vector<DetectionRecord> stylegan_queries() {
    return {canonicalize({{"Finger", 56.4}}, "stylegan-a"),
            canonicalize({{"Finger", 59.9}}, "stylegan-b"),
            canonicalize({{"Finger", 59.8}}, "stylegan-c"),
            canonicalize({{"Finger", 75.7}}, "stylegan-d"),
            canonicalize({{"Finger", 91.5}}, "stylegan-e")};
}

DetectionRecord whitelisted_only() {
    return canonicalize({{"Human", 99.9}, {"Face", 99.7}, {"Smile", 80.0}}, "real-x");
}

// Brute-force cosine over dense arrays, the oracle for the sparse version.
double dense_cosine(const SparseVector& a, const SparseVector& b) {
    const std::vector<double> da = a.dense();
    const std::vector<double> db = b.dense();
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        dot += da[i] * db[i];
        na += da[i] * da[i];
        nb += db[i] * db[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

DetectionRecord random_record(std::mt19937_64& rng, const std::string& id) {
    static const char* names[] = {"human", "person", "face", "finger", "tie",  "wood",
                                  "decor", "hair",   "dog",  "chair",  "lamp", "window"};
    std::uniform_int_distribution<int> count(0, 8);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(names) - 1);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    DetectionRecord record;
    record.image_id = id;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) record.labels[names[pick(rng)]] = value(rng);
    return record;
}

}  // namespace

TEST_CASE("fit stores the reference's out-of-context split") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc);
    CHECK(model.reference_ooc.labels.size() == 1);
    CHECK(model.reference_ooc.labels.at("finger") == 0.611);
    CHECK(model.tau == 0.5);
    CHECK(model.sigma == 0.3);
}

TEST_CASE("fit under any-ooc accepts a fully whitelisted reference") {
    CHECK_NOTHROW(fit(whitelisted_only(), default_face_whitelist(), Rule::AnyOoc));
}

TEST_CASE("fit fails when the rule needs OOC evidence the reference lacks") {
    CHECK_THROWS_AS(fit(whitelisted_only(), default_face_whitelist(), Rule::SharedOoc),
                    FitError);
    CHECK_THROWS_AS(fit(whitelisted_only(), default_face_whitelist(), Rule::CosineOoc),
                    FitError);
    CHECK_THROWS_AS(fit(DetectionRecord{"empty", {}}, default_face_whitelist(), Rule::AnyOoc),
                    FitError);
}

TEST_CASE("fit restricts a real-labeled reference to any-ooc") {
    CHECK_NOTHROW(fit(whitelisted_only(), default_face_whitelist(), Rule::AnyOoc, 0.5, 0.3,
                      ReferenceLabel::Real));
    CHECK_THROWS_AS(fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5, 0.3,
                        ReferenceLabel::Real),
                    FitError);
}

TEST_CASE("fit validates thresholds") {
    CHECK_THROWS_AS(fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 1.5),
                    ValidationError);
    CHECK_THROWS_AS(fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5, -0.1),
                    ValidationError);
}

TEST_CASE("shared-ooc flags a query that shares the reference's OOC label") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5);
    const Verdict verdict = classify(model, canonicalize({{"Finger", 91.5}}, "stylegan-e"));
    CHECK(verdict.fake);
    CHECK(verdict.score == 0.915);
    REQUIRE(verdict.evidence.size() == 1);
    CHECK(verdict.evidence[0].first == "finger");
    CHECK(verdict.evidence[0].second == 0.915);
}

TEST_CASE("a fully whitelisted query is real with score 0") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5);
    const Verdict verdict = classify(model, whitelisted_only());
    CHECK_FALSE(verdict.fake);
    CHECK(verdict.score == 0.0);
    CHECK(verdict.evidence.empty());
}

TEST_CASE("boundary equality classifies as fake") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.59);
    const Verdict verdict = classify(model, canonicalize({{"Finger", 59.0}}, "edge"));
    CHECK(verdict.fake);  // score == tau
    CHECK(verdict.score == 0.59);
}

TEST_CASE("shared-ooc ignores OOC labels the reference does not have") {
    const OneShotModel shared =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5);
    const DetectionRecord query = canonicalize({{"Wood", 90.0}}, "wood-only");
    CHECK_FALSE(classify(shared, query).fake);

    const OneShotModel any = fit(fake_face_a(), default_face_whitelist(), Rule::AnyOoc, 0.5);
    const Verdict verdict = classify(any, query);
    CHECK(verdict.fake);
    CHECK(verdict.score == 0.9);
}

TEST_CASE("cosine matches the hand-derived reference value") {
    // Reference OOC shaped (finger 0.611, wood 0.553); query finger-only 0.915.
    DetectionRecord reference;
    reference.image_id = "ref";
    reference.labels = {{"finger", 0.611}, {"wood", 0.553}, {"face", 0.996}};
    const OneShotModel model = fit(reference, default_face_whitelist(), Rule::CosineOoc);

    const DetectionRecord query = canonicalize({{"Finger", 91.5}}, "q");
    const Verdict verdict = classify(model, query);
    CHECK(verdict.fake);  // 0.7414 >= sigma 0.3
    CHECK(verdict.score == doctest::Approx(0.741420777519244).epsilon(1e-12));

    // Independent dense-vector computation.
    const SparseVector qv = vectorize(ooc_split(query, model.whitelist).second, model.vocab);
    CHECK(verdict.score == doctest::Approx(dense_cosine(qv, model.reference_vec)).epsilon(1e-15));
}

TEST_CASE("cosine basics: identical, disjoint, zero-norm") {
    const Vocabulary vocab = Vocabulary::from_labels({"finger", "wood"});
    DetectionRecord a;
    a.labels = {{"finger", 0.611}, {"wood", 0.553}};
    DetectionRecord b;
    b.labels = {{"finger", 0.915}};
    const SparseVector va = vectorize(a, vocab);
    const SparseVector vb = vectorize(b, vocab);

    CHECK(cosine(va, va) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(va, vb) == doctest::Approx(0.741420777519244).epsilon(1e-12));

    DetectionRecord c;
    c.labels = {{"wood", 0.4}};
    CHECK(cosine(vb, vectorize(c, vocab)) == 0.0);  // disjoint support
    CHECK(cosine(va, vectorize(DetectionRecord{}, vocab)) == 0.0);  // zero vector
}

TEST_CASE("cosine rejects vectors from different vocabularies") {
    const Vocabulary v1 = Vocabulary::from_labels({"finger"});
    const Vocabulary v2 = Vocabulary::from_labels({"wood"});
    DetectionRecord r;
    r.labels = {{"finger", 0.5}};
    DetectionRecord s;
    s.labels = {{"wood", 0.5}};
    CHECK_THROWS_AS(cosine(vectorize(r, v1), vectorize(s, v2)), CompatibilityError);
}

TEST_CASE("cosine agrees with the dense oracle on random vectors") {
    std::mt19937_64 rng(31);
    const Vocabulary vocab =
        Vocabulary::from_labels({"a", "b", "c", "d", "e", "f", "g", "h"});
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        SparseVector x, y;
        x.vocab_id = y.vocab_id = vocab.id();
        x.dim = y.dim = vocab.size();
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            if (rng() % 3 == 0) x.entries[j] = value(rng);
            if (rng() % 3 == 0) y.entries[j] = value(rng);
        }
        CHECK(cosine(x, y) == doctest::Approx(dense_cosine(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("cosine is invariant under positive scaling to 1e-12") {
    std::mt19937_64 rng(32);
    const Vocabulary vocab = Vocabulary::from_labels({"a", "b", "c", "d", "e"});
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::uniform_real_distribution<double> scale(1e-6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        SparseVector x, y;
        x.vocab_id = y.vocab_id = vocab.id();
        x.dim = y.dim = vocab.size();
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            if (rng() % 2 == 0) x.entries[j] = value(rng) + 1e-9;
            if (rng() % 2 == 0) y.entries[j] = value(rng) + 1e-9;
        }
        const double base = cosine(x, y);
        SparseVector scaled = x;
        const double c = scale(rng);
        for (auto& [index, v] : scaled.entries) v *= c;
        CHECK(cosine(scaled, y) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("classify_batch reproduces the reference scores in input order") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5);
    const auto queries = stylegan_queries();
    const std::vector<Verdict> verdicts = classify_batch(model, queries);
    REQUIRE(verdicts.size() == 5);
    const std::vector<double> expected{0.564, 0.599, 0.598, 0.757, 0.915};
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        CHECK(verdicts[i].fake);
        CHECK(verdicts[i].score == expected[i]);
        CHECK(verdicts[i].image_id == queries[i].image_id);
    }
}

TEST_CASE("classify_batch trivial cases") {
    const OneShotModel model =
        fit(fake_face_a(), default_face_whitelist(), Rule::SharedOoc, 0.5);
    CHECK(classify_batch(model, std::vector<DetectionRecord>{}).empty());

    const std::vector<DetectionRecord> one{whitelisted_only()};
    const std::vector<Verdict> verdicts = classify_batch(model, one);
    REQUIRE(verdicts.size() == 1);
    CHECK_FALSE(verdicts[0].fake);
}

TEST_CASE("classify_batch equals mapping classify, parallel equals serial") {
    std::mt19937_64 rng(33);
    for (Rule rule : {Rule::SharedOoc, Rule::AnyOoc, Rule::CosineOoc}) {
        const OneShotModel model = fit(fake_face_a(), default_face_whitelist(), rule);
        std::vector<DetectionRecord> queries;
        for (int i = 0; i < 200; ++i) queries.push_back(random_record(rng, "q" + std::to_string(i)));

        const std::vector<Verdict> parallel = classify_batch(model, queries);
        const std::vector<Verdict> serial = classify_batch_serial(model, queries);
        REQUIRE(parallel.size() == queries.size());
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const Verdict single = classify(model, queries[i]);
            CHECK(parallel[i].fake == single.fake);
            CHECK(parallel[i].score == single.score);
            CHECK(parallel[i].evidence == single.evidence);
            CHECK(serial[i].fake == single.fake);
            CHECK(serial[i].score == single.score);
            CHECK(serial[i].evidence == single.evidence);
        }
    }
}

TEST_CASE("raising tau never converts a real verdict to fake") {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> threshold(0.0, 1.0);
    for (Rule rule : {Rule::SharedOoc, Rule::AnyOoc}) {
        for (int i = 0; i < 500; ++i) {
            double t1 = threshold(rng);
            double t2 = threshold(rng);
            if (t1 > t2) std::swap(t1, t2);
            const OneShotModel low = fit(fake_face_a(), default_face_whitelist(), rule, t1);
            const OneShotModel high = fit(fake_face_a(), default_face_whitelist(), rule, t2);
            const DetectionRecord query = random_record(rng, "q");
            if (classify(high, query).fake) {
                CHECK(classify(low, query).fake);
            }
        }
    }
}

TEST_CASE("enlarging the whitelist never adds OOC labels") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 500; ++i) {
        const DetectionRecord record = random_record(rng, "r");
        ContextWhitelist small;
        for (const auto& [label, value] : record.labels) {
            if (rng() % 2 == 0) small.labels.insert(label);
        }
        ContextWhitelist large = small;
        for (const auto& [label, value] : record.labels) {
            if (rng() % 2 == 0) large.labels.insert(label);
        }
        const auto small_ooc = ooc_split(record, small).second.labels;
        const auto large_ooc = ooc_split(record, large).second.labels;
        for (const auto& [label, value] : large_ooc) {
            CHECK(small_ooc.count(label) == 1);
        }
    }
}

TEST_CASE("evidence is non-empty exactly when fake under shared/any rules") {
    std::mt19937_64 rng(36);
    for (Rule rule : {Rule::SharedOoc, Rule::AnyOoc}) {
        const OneShotModel model = fit(fake_face_a(), default_face_whitelist(), rule);
        for (int i = 0; i < 300; ++i) {
            const Verdict verdict = classify(model, random_record(rng, "q"));
            CHECK(verdict.fake == !verdict.evidence.empty());
            if (verdict.fake) {
                double best = 0.0;
                for (const auto& [label, value] : verdict.evidence) best = std::max(best, value);
                CHECK(verdict.score == best);  // score reproducible from evidence
            } else {
                CHECK(verdict.score == 0.0);
            }
        }
    }
}

TEST_CASE("model files round-trip for every rule") {
    for (Rule rule : {Rule::SharedOoc, Rule::AnyOoc, Rule::CosineOoc}) {
        const OneShotModel model =
            fit(fake_face_a(), default_face_whitelist(), rule, 0.55, 0.25);
        const std::string text = write_model(model, "whitelists/face_default.txt");
        std::string whitelist_file;
        const OneShotModel back = parse_model(text, &whitelist_file);
        CHECK(whitelist_file == "whitelists/face_default.txt");
        CHECK(back.rule == rule);
        CHECK(back.tau == 0.55);
        CHECK(back.sigma == 0.25);
        CHECK(back.reference == model.reference);
        CHECK(back.whitelist == model.whitelist);
        CHECK(back.reference_ooc == model.reference_ooc);
        CHECK(back.vocab == model.vocab);
        CHECK(write_model(back, whitelist_file) == text);
    }
}

TEST_CASE("model parsing rejects other formats and bad fields") {
    CHECK_THROWS_AS(parse_model("{\"format\": \"ooc-model v2\"}"), CompatibilityError);
    CHECK_THROWS_AS(parse_model("{}"), ValidationError);
    CHECK_THROWS_AS(parse_model("not json"), ParseError);
}
