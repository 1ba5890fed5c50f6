#include "ooc/harness.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "ooc/errors.hpp"
#include "ooc/io_util.hpp"

namespace ooc {

using nlohmann::json;

LabeledSet parse_labeled_fixture(std::string_view text) {
    LabeledSet set;
    std::set<std::string> seen;
    std::size_t index = 0;
    for (auto& entry : parse_fixture_entries(text)) {
        const std::string where = "entry " + std::to_string(index++);
        GroundTruth truth;
        if (entry.ground_truth == "fake") {
            truth = GroundTruth::Fake;
        } else if (entry.ground_truth == "real") {
            truth = GroundTruth::Real;
        } else {
            throw ValidationError(where + ": ground_truth must be \"fake\" or \"real\"");
        }
        if (!seen.insert(entry.record.image_id).second) {
            throw ValidationError(where + ": duplicate image_id \"" + entry.record.image_id +
                                  "\"");
        }
        set.entries.push_back({std::move(entry.record), truth});
    }
    return set;
}

EvalReport evaluate(const OneShotModel& model, const LabeledSet& set, RunMeta meta) {
    if (set.entries.empty()) {
        throw ValidationError("evaluate: labeled set is empty");
    }
    std::vector<DetectionRecord> queries;
    queries.reserve(set.entries.size());
    for (const LabeledEntry& entry : set.entries) {
        queries.push_back(entry.record);
    }
    const std::vector<Verdict> verdicts = classify_batch(model, queries);

    EvalReport report;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const bool is_fake = set.entries[i].truth == GroundTruth::Fake;
        if (verdicts[i].fake) {
            (is_fake ? report.tp : report.fp) += 1;
        } else {
            (is_fake ? report.fn : report.tn) += 1;
        }
    }
    const double total = static_cast<double>(report.total());
    report.accuracy = static_cast<double>(report.tp + report.tn) / total;
    const std::size_t positives = report.tp + report.fn;
    const std::size_t negatives = report.fp + report.tn;
    const std::size_t predicted = report.tp + report.fp;
    report.tpr = positives ? static_cast<double>(report.tp) / static_cast<double>(positives) : 0.0;
    report.fpr = negatives ? static_cast<double>(report.fp) / static_cast<double>(negatives) : 0.0;
    report.precision =
        predicted ? static_cast<double>(report.tp) / static_cast<double>(predicted) : 0.0;

    meta.rule = std::string(to_string(model.rule));
    meta.tau = model.tau;
    meta.sigma = model.sigma;
    meta.reference_label = model.reference_label == ReferenceLabel::Fake ? "fake" : "real";
    report.meta = std::move(meta);
    return report;
}

std::string report_csv(const EvalReport& r) {
    std::string out = "metric,value\n";
    out += "accuracy," + format_double(r.accuracy) + "\n";
    out += "tpr," + format_double(r.tpr) + "\n";
    out += "fpr," + format_double(r.fpr) + "\n";
    out += "precision," + format_double(r.precision) + "\n";
    out += "tp," + std::to_string(r.tp) + "\n";
    out += "fp," + std::to_string(r.fp) + "\n";
    out += "tn," + std::to_string(r.tn) + "\n";
    out += "fn," + std::to_string(r.fn) + "\n";
    out += "rule," + r.meta.rule + "\n";
    out += "tau," + format_double(r.meta.tau) + "\n";
    out += "sigma," + format_double(r.meta.sigma) + "\n";
    out += "reference_label," + r.meta.reference_label + "\n";
    out += "whitelist_file," + csv_field(r.meta.whitelist_file) + "\n";
    out += "remove_common," + std::string(r.meta.remove_common ? "true" : "false") + "\n";
    out += "fixture_checksum," + r.meta.fixture_checksum + "\n";
    out += "model_file," + csv_field(r.meta.model_file) + "\n";
    return out;
}

std::string report_text(const EvalReport& r) {
    json doc{
        {"format", "ooc-report v1"},
        {"counts", {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}}},
        {"accuracy", r.accuracy},
        {"tpr", r.tpr},
        {"fpr", r.fpr},
        {"precision", r.precision},
        {"meta",
         {{"rule", r.meta.rule},
          {"tau", r.meta.tau},
          {"sigma", r.meta.sigma},
          {"reference_label", r.meta.reference_label},
          {"whitelist_file", r.meta.whitelist_file},
          {"remove_common", r.meta.remove_common},
          {"fixture_checksum", r.meta.fixture_checksum},
          {"model_file", r.meta.model_file}}},
    };
    return doc.dump(2) + "\n";
}

EvalReport parse_report_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("report: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object() || !doc.contains("format") ||
        doc["format"].get<std::string>() != "ooc-report v1") {
        throw CompatibilityError("report: expected format \"ooc-report v1\"");
    }
    EvalReport r;
    const json& counts = doc.at("counts");
    r.tp = counts.at("tp").get<std::size_t>();
    r.fp = counts.at("fp").get<std::size_t>();
    r.tn = counts.at("tn").get<std::size_t>();
    r.fn = counts.at("fn").get<std::size_t>();
    r.accuracy = doc.at("accuracy").get<double>();
    r.tpr = doc.at("tpr").get<double>();
    r.fpr = doc.at("fpr").get<double>();
    r.precision = doc.at("precision").get<double>();
    const json& meta = doc.at("meta");
    r.meta.rule = meta.at("rule").get<std::string>();
    r.meta.tau = meta.at("tau").get<double>();
    r.meta.sigma = meta.at("sigma").get<double>();
    r.meta.reference_label = meta.at("reference_label").get<std::string>();
    r.meta.whitelist_file = meta.at("whitelist_file").get<std::string>();
    r.meta.remove_common = meta.at("remove_common").get<bool>();
    r.meta.fixture_checksum = meta.at("fixture_checksum").get<std::string>();
    r.meta.model_file = meta.at("model_file").get<std::string>();
    return r;
}

std::string comparison_csv(std::vector<ComparisonEntry> entries) {
    if (entries.empty()) {
        throw ValidationError("compare: at least one report is required");
    }
    std::set<std::string> names;
    for (const ComparisonEntry& entry : entries) {
        if (!names.insert(entry.name).second) {
            throw ValidationError("compare: duplicate name \"" + entry.name + "\"");
        }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.name < b.name;
    });
    std::string out = "name,accuracy,source\n";
    for (const ComparisonEntry& entry : entries) {
        out += csv_field(entry.name) + "," + format_double(entry.accuracy) + "," +
               (entry.external ? "external" : "evaluated") + "\n";
    }
    return out;
}

}  // namespace ooc
