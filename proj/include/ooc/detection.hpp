#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ooc {

// One label as a detection vendor reports it: display name plus a
// confidence percentage in [0, 100].
struct RawLabel {
    std::string name;
    double confidence = 0.0;
};

// Canonical per-image detection result. Keys are lowercased, trimmed and
// whitespace-collapsed; confidences live in [0, 1]. The map keeps label
// iteration deterministic.
struct DetectionRecord {
    std::string image_id;
    std::map<std::string, double> labels;

    bool operator==(const DetectionRecord&) const = default;
};

// Lowercases, trims and collapses internal whitespace runs to single spaces.
std::string canonical_label(std::string_view name);

// Normalizes raw vendor labels into a DetectionRecord: names canonicalized,
// confidences divided by 100, duplicate labels resolved by keeping the
// maximum confidence. Throws ValidationError naming the offending label when
// a confidence is non-finite or outside [0, 100], or a name is empty after
// trimming.
DetectionRecord canonicalize(const std::vector<RawLabel>& raw, std::string image_id);

// Maps a confidence in [0, 1] back to the percentage stored in fixture
// files. Picks a percentage whose division by 100 reproduces the value
// bit-for-bit whenever such a preimage exists (it always does for values
// that came out of canonicalize), so fixture round-trips are exact.
double to_percent(double value);

// One fixture entry. ground_truth and source are optional annotations:
// ground_truth is consumed by the evaluation harness, source is free-form
// provenance (e.g. "constructed") and is ignored by the pipeline.
struct FixtureEntry {
    DetectionRecord record;
    std::string ground_truth;  // "", "fake" or "real"
    std::string source;
};

// Parses the canonical fixture interchange format: a JSON array of
// {"image_id": string, "labels": [{"name": string, "confidence": 0-100}]}.
// Malformed syntax raises ParseError with the byte position; schema
// violations raise ValidationError with the entry index. Input order is
// preserved.
std::vector<FixtureEntry> parse_fixture_entries(std::string_view text);
std::vector<DetectionRecord> parse_fixture(std::string_view text);

std::string write_fixture_entries(const std::vector<FixtureEntry>& entries);
std::string write_fixture(const std::vector<DetectionRecord>& records);

}  // namespace ooc
