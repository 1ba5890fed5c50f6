#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ooc/detection.hpp"
#include "ooc/oneshot.hpp"

namespace ooc {

enum class GroundTruth { Fake, Real };

struct LabeledEntry {
    DetectionRecord record;
    GroundTruth truth = GroundTruth::Fake;
};

// A labeled evaluation set. image_ids are unique.
struct LabeledSet {
    std::vector<LabeledEntry> entries;
};

// Labeled fixture file: the fixture format plus a required
// "ground_truth": "fake"|"real" per entry.
LabeledSet parse_labeled_fixture(std::string_view text);

// Everything needed to reproduce a run. rule/tau/sigma/reference_label are
// filled in from the model by evaluate(); the file-level fields are supplied
// by the caller.
struct RunMeta {
    std::string rule;
    double tau = 0.0;
    double sigma = 0.0;
    std::string reference_label = "fake";
    std::string whitelist_file;
    bool remove_common = false;
    std::string fixture_checksum;
    std::string model_file;

    bool operator==(const RunMeta&) const = default;
};

// Confusion counts and derived rates for one evaluation run. Fake is the
// positive class.
struct EvalReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double tpr = 0.0;        // fake recall
    double fpr = 0.0;
    double precision = 0.0;  // 0 when nothing was classified fake
    RunMeta meta;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const EvalReport&) const = default;
};

// Classifies every entry (via classify_batch) and tallies the confusion
// matrix against ground truth. Empty sets raise ValidationError.
EvalReport evaluate(const OneShotModel& model, const LabeledSet& set, RunMeta meta = {});

// Report serializations. The CSV has fixed columns "metric,value"; the
// structured-text form mirrors every EvalReport field and round-trips
// through parse_report_text.
std::string report_csv(const EvalReport& report);
std::string report_text(const EvalReport& report);
EvalReport parse_report_text(std::string_view text);

// One row of a method comparison table. External rows carry accuracies
// taken from elsewhere rather than computed by this harness.
struct ComparisonEntry {
    std::string name;
    double accuracy = 0.0;
    bool external = false;
};

// CSV table with one row per entry, sorted by accuracy descending (name
// ascending on ties). Duplicate names raise ValidationError.
std::string comparison_csv(std::vector<ComparisonEntry> entries);

}  // namespace ooc
