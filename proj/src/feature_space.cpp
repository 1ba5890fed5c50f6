#include "ooc/feature_space.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "ooc/errors.hpp"
#include "ooc/io_util.hpp"

namespace ooc {

using nlohmann::json;

namespace {

std::string hash_labels(const std::vector<std::string>& labels) {
    std::string joined;
    for (const std::string& label : labels) {
        joined += label;
        joined += '\n';
    }
    return fnv1a64_hex(joined);
}

}  // namespace

Vocabulary Vocabulary::from_labels(std::vector<std::string> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    Vocabulary vocab;
    vocab.labels_ = std::move(labels);
    vocab.id_ = hash_labels(vocab.labels_);
    return vocab;
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

VocabularyBuild build_vocabulary(const std::vector<DetectionRecord>& records,
                                 bool remove_common) {
    if (records.empty()) {
        throw ValidationError("build_vocabulary: records list is empty");
    }
    std::set<std::string> all;
    for (const DetectionRecord& record : records) {
        for (const auto& [label, value] : record.labels) {
            all.insert(label);
        }
    }

    VocabularyBuild result;
    if (remove_common && records.size() == 1) {
        result.warning =
            "remove_common skipped: a single record would always produce an "
            "empty vocabulary";
    } else if (remove_common) {
        for (auto it = all.begin(); it != all.end();) {
            const bool everywhere = std::all_of(
                records.begin(), records.end(),
                [&](const DetectionRecord& r) { return r.labels.count(*it) != 0; });
            it = everywhere ? all.erase(it) : std::next(it);
        }
    }
    result.vocabulary =
        Vocabulary::from_labels(std::vector<std::string>(all.begin(), all.end()));
    return result;
}

std::vector<double> SparseVector::dense() const {
    std::vector<double> out(dim, 0.0);
    for (const auto& [index, value] : entries) {
        out[index] = value;
    }
    return out;
}

SparseVector vectorize(const DetectionRecord& record, const Vocabulary& vocab) {
    SparseVector vec;
    vec.image_id = record.image_id;
    vec.vocab_id = vocab.id();
    vec.dim = vocab.size();
    for (const auto& [label, value] : record.labels) {
        if (value == 0.0) continue;
        if (auto index = vocab.index_of(label)) {
            vec.entries.emplace(*index, value);
        }
    }
    return vec;
}

std::vector<SparseVector> vectorize_batch_serial(std::span<const DetectionRecord> records,
                                                 const Vocabulary& vocab) {
    std::vector<SparseVector> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out[i] = vectorize(records[i], vocab);
    }
    return out;
}

std::vector<SparseVector> vectorize_batch(std::span<const DetectionRecord> records,
                                          const Vocabulary& vocab) {
    std::vector<SparseVector> out(records.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(records.size()); ++i) {
        out[i] = vectorize(records[i], vocab);
    }
    return out;
}

ContextWhitelist default_face_whitelist() {
    return ContextWhitelist{{"human", "person", "face", "head", "hair", "smile",
                             "clothing", "apparel", "tie", "suit", "glasses",
                             "accessories", "accessory", "decor"}};
}

std::pair<DetectionRecord, DetectionRecord> ooc_split(const DetectionRecord& record,
                                                      const ContextWhitelist& whitelist) {
    DetectionRecord in_context;
    DetectionRecord out_of_context;
    in_context.image_id = record.image_id;
    out_of_context.image_id = record.image_id;
    for (const auto& [label, value] : record.labels) {
        (whitelist.contains(label) ? in_context : out_of_context).labels.emplace(label, value);
    }
    return {std::move(in_context), std::move(out_of_context)};
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string write_vocabulary(const Vocabulary& vocab) {
    std::string out = "ooc-vocab v1 w=" + std::to_string(vocab.size()) + "\n";
    for (const std::string& label : vocab.labels()) {
        out += label;
        out += '\n';
    }
    return out;
}

Vocabulary parse_vocabulary(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("vocabulary: empty file");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const std::string prefix = "ooc-vocab v1 w=";
    if (header.rfind("ooc-vocab ", 0) != 0) {
        throw ParseError("vocabulary: missing \"ooc-vocab\" header");
    }
    if (header.rfind(prefix, 0) != 0) {
        throw CompatibilityError("vocabulary: unsupported version in header \"" + header + "\"");
    }
    std::size_t expected = 0;
    try {
        expected = std::stoul(header.substr(prefix.size()));
    } catch (const std::exception&) {
        throw ParseError("vocabulary: malformed w= count in header \"" + header + "\"");
    }

    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line != canonical_label(line)) {
            throw ValidationError("vocabulary: label \"" + line + "\" is not canonical");
        }
        labels.push_back(line);
    }
    if (labels.size() != expected) {
        throw ValidationError("vocabulary: header says w=" + std::to_string(expected) +
                              " but file has " + std::to_string(labels.size()) + " labels");
    }
    if (!std::is_sorted(labels.begin(), labels.end()) ||
        std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
        throw ValidationError("vocabulary: labels must be unique and sorted ascending");
    }
    return Vocabulary::from_labels(std::move(labels));
}

std::string write_vectors(const std::vector<SparseVector>& vectors) {
    json doc = json::array();
    for (const SparseVector& vec : vectors) {
        json entries = json::array();
        for (const auto& [index, value] : vec.entries) {
            entries.push_back({{"index", index}, {"value", value}});
        }
        doc.push_back({{"image_id", vec.image_id},
                       {"vocab_id", vec.vocab_id},
                       {"entries", std::move(entries)}});
    }
    return doc.dump(2) + "\n";
}

std::vector<SparseVector> parse_vectors(std::string_view text, const Vocabulary& expected) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("vectors: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_array()) {
        throw ValidationError("vectors: top-level value must be an array");
    }
    std::vector<SparseVector> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& obj = doc[i];
        const std::string where = "vector " + std::to_string(i);
        if (!obj.is_object() || !obj.contains("image_id") || !obj["image_id"].is_string() ||
            !obj.contains("vocab_id") || !obj["vocab_id"].is_string() ||
            !obj.contains("entries") || !obj["entries"].is_array()) {
            throw ValidationError(where + ": expected {image_id, vocab_id, entries[]}");
        }
        SparseVector vec;
        vec.image_id = obj["image_id"].get<std::string>();
        vec.vocab_id = obj["vocab_id"].get<std::string>();
        if (vec.vocab_id != expected.id()) {
            throw CompatibilityError(where + ": vocab_id " + vec.vocab_id +
                                     " does not match vocabulary " + expected.id());
        }
        vec.dim = expected.size();
        for (const json& entry : obj["entries"]) {
            if (!entry.is_object() || !entry.contains("index") ||
                !entry["index"].is_number_unsigned() || !entry.contains("value") ||
                !entry["value"].is_number()) {
                throw ValidationError(where + ": entries must be {index: uint, value: number}");
            }
            const auto index = entry["index"].get<std::size_t>();
            const auto value = entry["value"].get<double>();
            if (index >= vec.dim) {
                throw ValidationError(where + ": index " + std::to_string(index) +
                                      " out of range for w=" + std::to_string(vec.dim));
            }
            if (!(value > 0.0) || value > 1.0) {
                throw ValidationError(where + ": stored values must lie in (0, 1]");
            }
            vec.entries.emplace(index, value);
        }
        out.push_back(std::move(vec));
    }
    return out;
}

std::string write_whitelist(const ContextWhitelist& whitelist) {
    std::string out;
    for (const std::string& label : whitelist.labels) {
        out += label;
        out += '\n';
    }
    return out;
}

ContextWhitelist parse_whitelist(std::string_view text) {
    ContextWhitelist whitelist;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const std::string label = canonical_label(line);
        if (label.empty() || label[0] == '#') continue;
        whitelist.labels.insert(label);
    }
    return whitelist;
}

}  // namespace ooc
