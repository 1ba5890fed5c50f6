#include "ooc/detection.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ooc/errors.hpp"
#include "ooc/io_util.hpp"

namespace ooc {

using nlohmann::json;

std::string canonical_label(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (char ch : name) {
        const auto uc = static_cast<unsigned char>(ch);
        if (std::isspace(uc)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(uc));
    }
    return out;
}

DetectionRecord canonicalize(const std::vector<RawLabel>& raw, std::string image_id) {
    DetectionRecord record;
    record.image_id = std::move(image_id);
    for (const RawLabel& label : raw) {
        if (!std::isfinite(label.confidence) || label.confidence < 0.0 ||
            label.confidence > 100.0) {
            throw ValidationError("label \"" + label.name +
                                  "\": confidence must be a finite percentage in [0, 100]");
        }
        const std::string key = canonical_label(label.name);
        if (key.empty()) {
            throw ValidationError("label \"" + label.name + "\": name is empty after trimming");
        }
        const double value = label.confidence / 100.0;
        auto [it, inserted] = record.labels.emplace(key, value);
        if (!inserted && value > it->second) {
            it->second = value;
        }
    }
    return record;
}

double to_percent(double value) {
    double p = value * 100.0;
    if (p / 100.0 == value) return p;
    // Scaling by a non-power-of-two can land one ulp off; the exact preimage,
    // when it exists, is within a few ulps of value * 100.
    double up = p;
    double down = p;
    for (int step = 0; step < 3; ++step) {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        if (up / 100.0 == value) return up;
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        if (down / 100.0 == value) return down;
    }
    return p;
}

namespace {

DetectionRecord entry_to_record(const json& entry, std::size_t index) {
    const std::string where = "entry " + std::to_string(index);
    if (!entry.is_object()) {
        throw ValidationError(where + ": expected an object");
    }
    if (!entry.contains("image_id") || !entry["image_id"].is_string()) {
        throw ValidationError(where + ": missing string field \"image_id\"");
    }
    if (!entry.contains("labels") || !entry["labels"].is_array()) {
        throw ValidationError(where + ": missing array field \"labels\"");
    }
    std::vector<RawLabel> raw;
    raw.reserve(entry["labels"].size());
    for (std::size_t i = 0; i < entry["labels"].size(); ++i) {
        const json& item = entry["labels"][i];
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string() ||
            !item.contains("confidence") || !item["confidence"].is_number()) {
            throw ValidationError(where + ", label " + std::to_string(i) +
                                  ": expected {\"name\": string, \"confidence\": number}");
        }
        raw.push_back({item["name"].get<std::string>(), item["confidence"].get<double>()});
    }
    try {
        return canonicalize(raw, entry["image_id"].get<std::string>());
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

}  // namespace

std::vector<FixtureEntry> parse_fixture_entries(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("fixture: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_array()) {
        throw ValidationError("fixture: top-level value must be an array");
    }
    std::vector<FixtureEntry> entries;
    entries.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        FixtureEntry entry;
        entry.record = entry_to_record(doc[i], i);
        if (doc[i].contains("ground_truth")) {
            if (!doc[i]["ground_truth"].is_string()) {
                throw ValidationError("entry " + std::to_string(i) +
                                      ": \"ground_truth\" must be a string");
            }
            entry.ground_truth = doc[i]["ground_truth"].get<std::string>();
        }
        if (doc[i].contains("source") && doc[i]["source"].is_string()) {
            entry.source = doc[i]["source"].get<std::string>();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<DetectionRecord> parse_fixture(std::string_view text) {
    std::vector<DetectionRecord> records;
    for (auto& entry : parse_fixture_entries(text)) {
        records.push_back(std::move(entry.record));
    }
    return records;
}

std::string write_fixture_entries(const std::vector<FixtureEntry>& entries) {
    json doc = json::array();
    for (const FixtureEntry& entry : entries) {
        json labels = json::array();
        for (const auto& [name, value] : entry.record.labels) {
            labels.push_back({{"name", name}, {"confidence", to_percent(value)}});
        }
        json obj{{"image_id", entry.record.image_id}, {"labels", std::move(labels)}};
        if (!entry.ground_truth.empty()) obj["ground_truth"] = entry.ground_truth;
        if (!entry.source.empty()) obj["source"] = entry.source;
        doc.push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

std::string write_fixture(const std::vector<DetectionRecord>& records) {
    std::vector<FixtureEntry> entries;
    entries.reserve(records.size());
    for (const DetectionRecord& record : records) {
        entries.push_back({record, "", ""});
    }
    return write_fixture_entries(entries);
}

}  // namespace ooc
