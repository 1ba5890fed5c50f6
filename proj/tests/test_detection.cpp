#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "ooc/detection.hpp"
#include "ooc/errors.hpp"
#include "ooc/io_util.hpp"

using namespace ooc;

namespace {

// Random but valid vendor output for property tests.
std::vector<RawLabel> random_raw_labels(std::mt19937_64& rng) {
    static const char* names[] = {"Human",  "Person", "Face",   "Finger", "Tie",
                                  "Wood",   "Decor",  "Hair",   "Smile",  "Glasses",
                                  "Window", "Chair",  "Bottle", "  Furniture  "};
    std::uniform_int_distribution<int> count(0, 8);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(names) - 1);
    std::uniform_real_distribution<double> percent(0.0, 100.0);
    std::vector<RawLabel> raw;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        raw.push_back({names[pick(rng)], percent(rng)});
    }
    return raw;
}

}  // namespace

TEST_CASE("canonical_label trims, lowercases and collapses whitespace") {
    CHECK(canonical_label("Finger") == "finger");
    CHECK(canonical_label("  No   Glasses \t") == "no glasses");
    CHECK(canonical_label("TIE") == "tie");
    CHECK(canonical_label("   ") == "");
}

TEST_CASE("canonicalize divides confidences by 100 and lowercases names") {
    const DetectionRecord record =
        canonicalize({{"Finger", 61.10}, {"Tie", 55.3}}, "fake-a");
    CHECK(record.image_id == "fake-a");
    REQUIRE(record.labels.size() == 2);
    CHECK(record.labels.at("finger") == 61.10 / 100.0);
    CHECK(record.labels.at("finger") == 0.611);  // lands exactly on the decimal literal
    CHECK(record.labels.at("tie") == 55.3 / 100.0);
    CHECK(record.labels.at("tie") == doctest::Approx(0.553).epsilon(1e-12));
}

TEST_CASE("canonicalize of an empty list yields an empty record") {
    const DetectionRecord record = canonicalize({}, "none");
    CHECK(record.labels.empty());
}

TEST_CASE("duplicate labels keep the maximum confidence") {
    const DetectionRecord record =
        canonicalize({{"Face", 99.6}, {"face", 50.0}}, "dup");
    REQUIRE(record.labels.size() == 1);
    CHECK(record.labels.at("face") == 99.6 / 100.0);
}

TEST_CASE("canonicalize rejects bad confidences and empty names") {
    CHECK_THROWS_AS(canonicalize({{"Finger", 150.0}}, "x"), ValidationError);
    CHECK_THROWS_AS(canonicalize({{"Finger", -0.5}}, "x"), ValidationError);
    CHECK_THROWS_AS(canonicalize({{"Finger", std::nan("")}}, "x"), ValidationError);
    CHECK_THROWS_AS(canonicalize({{"   ", 10.0}}, "x"), ValidationError);

    try {
        canonicalize({{"Finger", 150.0}}, "x");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Finger") != std::string::npos);
    }
}

TEST_CASE("canonicalize is idempotent on already-canonical labels") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const DetectionRecord once = canonicalize(random_raw_labels(rng), "img");
        std::vector<RawLabel> again;
        for (const auto& [name, value] : once.labels) {
            again.push_back({name, to_percent(value)});
        }
        CHECK(canonicalize(again, "img") == once);
    }
}

TEST_CASE("every produced confidence lies in [0, 1]") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 1000; ++i) {
        const DetectionRecord record = canonicalize(random_raw_labels(rng), "img");
        for (const auto& [name, value] : record.labels) {
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
        }
    }
}

TEST_CASE("to_percent finds an exact preimage of division by 100") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> percent(0.0, 100.0);
    for (int i = 0; i < 100000; ++i) {
        const double v = percent(rng) / 100.0;
        CHECK(to_percent(v) / 100.0 == v);
    }
}

TEST_CASE("parse_fixture reads the interchange format") {
    const std::string text = R"([
      {"image_id": "fake-b", "labels": [
        {"name": "Human", "confidence": 99.5},
        {"name": "Person", "confidence": 99.5},
        {"name": "Face", "confidence": 99.5},
        {"name": "Clothing", "confidence": 74.1},
        {"name": "Finger", "confidence": 59},
        {"name": "Wood", "confidence": 82.4}
      ]}
    ])";
    const auto records = parse_fixture(text);
    REQUIRE(records.size() == 1);
    const DetectionRecord& r = records[0];
    CHECK(r.image_id == "fake-b");
    REQUIRE(r.labels.size() == 6);
    CHECK(r.labels.at("human") == doctest::Approx(0.995).epsilon(1e-12));
    CHECK(r.labels.at("person") == doctest::Approx(0.995).epsilon(1e-12));
    CHECK(r.labels.at("face") == doctest::Approx(0.995).epsilon(1e-12));
    CHECK(r.labels.at("clothing") == doctest::Approx(0.741).epsilon(1e-12));
    CHECK(r.labels.at("finger") == doctest::Approx(0.59).epsilon(1e-12));
    CHECK(r.labels.at("wood") == doctest::Approx(0.824).epsilon(1e-12));
}

TEST_CASE("parse_fixture with zero entries yields an empty list") {
    CHECK(parse_fixture("[]").empty());
}

TEST_CASE("parse_fixture surfaces schema violations with the entry index") {
    const std::string bad = R"([{"image_id": "x", "labels": [{"name": "A", "confidence": 150}]}])";
    try {
        parse_fixture(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("entry 0") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_fixture(R"([{"labels": []}])"), ValidationError);
    CHECK_THROWS_AS(parse_fixture(R"({"image_id": "x"})"), ValidationError);
}

TEST_CASE("parse_fixture reports a byte position for malformed syntax") {
    try {
        parse_fixture("[{\"image_id\": }]");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.byte() > 0);
    }
}

TEST_CASE("fixture round-trip is the identity on canonical records") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 300; ++i) {
        std::vector<DetectionRecord> records;
        std::uniform_int_distribution<int> count(0, 4);
        const int n = count(rng);
        for (int j = 0; j < n; ++j) {
            records.push_back(canonicalize(random_raw_labels(rng), "img-" + std::to_string(j)));
        }
        CHECK(parse_fixture(write_fixture(records)) == records);
    }
}

TEST_CASE("ground_truth and source annotations survive entry parsing") {
    const std::string text = R"([
      {"image_id": "q", "ground_truth": "fake", "source": "constructed",
       "labels": [{"name": "Finger", "confidence": 60}]}
    ])";
    const auto entries = parse_fixture_entries(text);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].ground_truth == "fake");
    CHECK(entries[0].source == "constructed");
    CHECK(entries[0].record.labels.at("finger") == 0.6);
}

TEST_CASE("shipped fixtures parse") {
    const auto a = parse_fixture(read_file(std::string(OOC_DATA_DIR) + "/fixtures/fake_face_a.json"));
    REQUIRE(a.size() == 1);
    CHECK(a[0].labels.at("finger") == 0.611);
    CHECK(a[0].labels.at("decor") == 0.635);

    const auto attrs =
        parse_fixture(read_file(std::string(OOC_DATA_DIR) + "/fixtures/facial_attributes.json"));
    REQUIRE(attrs.size() == 2);
    CHECK(attrs[0].labels.at("face") == 1.0);
}
