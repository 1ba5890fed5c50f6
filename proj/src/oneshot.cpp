#include "ooc/oneshot.hpp"

#include <cmath>

#include <json.hpp>

#include "ooc/errors.hpp"

namespace ooc {

using nlohmann::json;

Rule parse_rule(std::string_view name) {
    if (name == "shared-ooc") return Rule::SharedOoc;
    if (name == "any-ooc") return Rule::AnyOoc;
    if (name == "cosine-ooc") return Rule::CosineOoc;
    throw ValidationError("unknown rule \"" + std::string(name) +
                          "\" (expected shared-ooc, any-ooc or cosine-ooc)");
}

std::string_view to_string(Rule rule) {
    switch (rule) {
        case Rule::SharedOoc: return "shared-ooc";
        case Rule::AnyOoc: return "any-ooc";
        case Rule::CosineOoc: return "cosine-ooc";
    }
    return "?";
}

OneShotModel fit(DetectionRecord reference, ContextWhitelist whitelist, Rule rule,
                 double tau, double sigma, ReferenceLabel reference_label) {
    if (reference.labels.empty()) {
        throw FitError("fit: reference record has no labels");
    }
    if (tau < 0.0 || tau > 1.0 || sigma < 0.0 || sigma > 1.0) {
        throw ValidationError("fit: thresholds must lie in [0, 1]");
    }
    if (reference_label == ReferenceLabel::Real && rule != Rule::AnyOoc) {
        throw FitError("fit: a reference labeled real is permitted under any-ooc only");
    }

    OneShotModel model;
    model.reference = std::move(reference);
    model.whitelist = std::move(whitelist);
    model.rule = rule;
    model.tau = tau;
    model.sigma = sigma;
    model.reference_label = reference_label;
    model.reference_ooc = ooc_split(model.reference, model.whitelist).second;

    if ((rule == Rule::SharedOoc || rule == Rule::CosineOoc) &&
        model.reference_ooc.labels.empty()) {
        throw FitError(std::string("fit: the reference has no out-of-context labels, so ") +
                       std::string(to_string(rule)) +
                       " cannot discriminate (any-ooc remains available)");
    }
    if (rule == Rule::CosineOoc) {
        std::vector<std::string> labels;
        for (const auto& [label, value] : model.reference_ooc.labels) {
            labels.push_back(label);
        }
        model.vocab = Vocabulary::from_labels(std::move(labels));
        model.reference_vec = vectorize(model.reference_ooc, model.vocab);
    }
    return model;
}

double cosine(const SparseVector& a, const SparseVector& b) {
    if (a.vocab_id != b.vocab_id) {
        throw CompatibilityError("cosine: vectors come from different vocabularies (" +
                                 a.vocab_id + " vs " + b.vocab_id + ")");
    }
    double dot = 0.0;
    const SparseVector& small = a.entries.size() <= b.entries.size() ? a : b;
    const SparseVector& large = a.entries.size() <= b.entries.size() ? b : a;
    for (const auto& [index, value] : small.entries) {
        auto it = large.entries.find(index);
        if (it != large.entries.end()) dot += value * it->second;
    }
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& [index, value] : a.entries) norm_a += value * value;
    for (const auto& [index, value] : b.entries) norm_b += value * value;
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

Verdict classify(const OneShotModel& model, const DetectionRecord& query) {
    Verdict verdict;
    verdict.image_id = query.image_id;
    const DetectionRecord query_ooc = ooc_split(query, model.whitelist).second;

    switch (model.rule) {
        case Rule::SharedOoc:
        case Rule::AnyOoc: {
            double best = 0.0;
            std::vector<std::pair<std::string, double>> hits;
            for (const auto& [label, value] : query_ooc.labels) {
                if (model.rule == Rule::SharedOoc &&
                    model.reference_ooc.labels.count(label) == 0) {
                    continue;
                }
                if (value >= model.tau) {
                    hits.emplace_back(label, value);
                    if (value > best) best = value;
                }
            }
            if (!hits.empty()) {
                verdict.fake = true;
                verdict.score = best;
                verdict.evidence = std::move(hits);
            }
            break;
        }
        case Rule::CosineOoc: {
            const SparseVector query_vec = vectorize(query_ooc, model.vocab);
            const double similarity = cosine(query_vec, model.reference_vec);
            verdict.score = similarity;
            if (similarity >= model.sigma) {
                verdict.fake = true;
                for (const auto& [label, value] : query_ooc.labels) {
                    if (model.vocab.index_of(label)) {
                        verdict.evidence.emplace_back(label, value);
                    }
                }
            }
            break;
        }
    }
    return verdict;
}

std::vector<Verdict> classify_batch_serial(const OneShotModel& model,
                                           std::span<const DetectionRecord> queries) {
    std::vector<Verdict> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out[i] = classify(model, queries[i]);
    }
    return out;
}

std::vector<Verdict> classify_batch(const OneShotModel& model,
                                    std::span<const DetectionRecord> queries) {
    std::vector<Verdict> out(queries.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i) {
        out[i] = classify(model, queries[i]);
    }
    return out;
}

std::string write_model(const OneShotModel& model, const std::string& whitelist_file) {
    json reference_labels = json::array();
    for (const auto& [name, value] : model.reference.labels) {
        reference_labels.push_back({{"name", name}, {"confidence", to_percent(value)}});
    }
    json doc{
        {"format", "ooc-model v1"},
        {"rule", std::string(to_string(model.rule))},
        {"tau", model.tau},
        {"sigma", model.sigma},
        {"reference_label", model.reference_label == ReferenceLabel::Fake ? "fake" : "real"},
        {"whitelist", json(model.whitelist.labels)},
        {"reference",
         {{"image_id", model.reference.image_id}, {"labels", std::move(reference_labels)}}},
    };
    if (model.rule == Rule::CosineOoc) {
        doc["vocab"] = json(model.vocab.labels());
    }
    if (!whitelist_file.empty()) {
        doc["whitelist_file"] = whitelist_file;
    }
    return doc.dump(2) + "\n";
}

OneShotModel parse_model(std::string_view text, std::string* whitelist_file) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("model: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string()) {
        throw ValidationError("model: missing \"format\" field");
    }
    if (doc["format"].get<std::string>() != "ooc-model v1") {
        throw CompatibilityError("model: unsupported format \"" +
                                 doc["format"].get<std::string>() + "\"");
    }
    for (const char* field : {"rule", "tau", "sigma", "whitelist", "reference"}) {
        if (!doc.contains(field)) {
            throw ValidationError(std::string("model: missing \"") + field + "\" field");
        }
    }

    const Rule rule = parse_rule(doc["rule"].get<std::string>());
    ReferenceLabel reference_label = ReferenceLabel::Fake;
    if (doc.contains("reference_label")) {
        const std::string value = doc["reference_label"].get<std::string>();
        if (value == "real") {
            reference_label = ReferenceLabel::Real;
        } else if (value != "fake") {
            throw ValidationError("model: reference_label must be \"fake\" or \"real\"");
        }
    }

    ContextWhitelist whitelist;
    for (const json& label : doc["whitelist"]) {
        const std::string canonical = canonical_label(label.get<std::string>());
        if (!canonical.empty()) whitelist.labels.insert(canonical);
    }

    const json& ref = doc["reference"];
    if (!ref.is_object() || !ref.contains("image_id") || !ref.contains("labels")) {
        throw ValidationError("model: reference must be a fixture entry object");
    }
    std::vector<RawLabel> raw;
    for (const json& item : ref["labels"]) {
        raw.push_back({item["name"].get<std::string>(), item["confidence"].get<double>()});
    }
    DetectionRecord reference = canonicalize(raw, ref["image_id"].get<std::string>());

    OneShotModel model = fit(std::move(reference), std::move(whitelist), rule,
                             doc["tau"].get<double>(), doc["sigma"].get<double>(),
                             reference_label);

    if (doc.contains("vocab")) {
        std::vector<std::string> stored;
        for (const json& label : doc["vocab"]) stored.push_back(label.get<std::string>());
        if (Vocabulary::from_labels(stored) != model.vocab) {
            throw CompatibilityError(
                "model: stored vocab does not match the reference's out-of-context labels");
        }
    }
    if (whitelist_file != nullptr) {
        *whitelist_file = doc.contains("whitelist_file")
                              ? doc["whitelist_file"].get<std::string>()
                              : std::string();
    }
    return model;
}

}  // namespace ooc
