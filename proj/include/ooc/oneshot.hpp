#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ooc/detection.hpp"
#include "ooc/feature_space.hpp"

namespace ooc {

// Decision rules for one-shot classification. shared-ooc marks a query fake
// when it shares an out-of-context label with the reference, any-ooc when it
// has any out-of-context label at all, cosine-ooc when its out-of-context
// vector is similar enough to the reference's.
enum class Rule { SharedOoc, AnyOoc, CosineOoc };

Rule parse_rule(std::string_view name);          // ValidationError on unknown name
std::string_view to_string(Rule rule);

enum class ReferenceLabel { Fake, Real };

// The entire trained state: one reference record, the whitelist that defines
// out-of-context, the rule and its thresholds. Immutable after fit.
struct OneShotModel {
    DetectionRecord reference;
    ContextWhitelist whitelist;
    Rule rule = Rule::SharedOoc;
    double tau = 0.5;    // confidence threshold
    double sigma = 0.3;  // cosine similarity threshold
    ReferenceLabel reference_label = ReferenceLabel::Fake;

    // Derived at fit time.
    DetectionRecord reference_ooc;
    Vocabulary vocab;             // over the reference's OOC labels (cosine rule)
    SparseVector reference_vec;   // vectorized reference OOC (cosine rule)
};

// Fits a model from exactly one reference instance. shared-ooc and
// cosine-ooc require the reference to have at least one out-of-context
// label; otherwise the rule cannot discriminate and a FitError is raised
// (any-ooc remains available). A reference labeled real is permitted under
// any-ooc only.
OneShotModel fit(DetectionRecord reference, ContextWhitelist whitelist, Rule rule,
                 double tau = 0.5, double sigma = 0.3,
                 ReferenceLabel reference_label = ReferenceLabel::Fake);

struct Verdict {
    std::string image_id;
    bool fake = false;
    double score = 0.0;
    std::vector<std::pair<std::string, double>> evidence;
};

// Pure decision function. Ties at the threshold classify as fake.
Verdict classify(const OneShotModel& model, const DetectionRecord& query);

// Cosine similarity over dense expansions, computed sparsely. Defined as 0
// when either vector has zero norm. Vectors from different vocabularies
// raise CompatibilityError.
double cosine(const SparseVector& a, const SparseVector& b);

// Element-wise classify over a batch. The default parallelizes with OpenMP;
// the serial variant is the reference kept for testing and benchmarks. Both
// return verdicts in input order.
std::vector<Verdict> classify_batch(const OneShotModel& model,
                                    std::span<const DetectionRecord> queries);
std::vector<Verdict> classify_batch_serial(const OneShotModel& model,
                                           std::span<const DetectionRecord> queries);

// Model file ("ooc-model v1"): JSON object with rule, thresholds, whitelist,
// the reference as a fixture entry, and the derived vocabulary for the
// cosine rule. whitelist_file records where the whitelist came from, for
// report metadata.
std::string write_model(const OneShotModel& model, const std::string& whitelist_file = "");
OneShotModel parse_model(std::string_view text, std::string* whitelist_file = nullptr);

}  // namespace ooc
