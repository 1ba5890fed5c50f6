#include "ooc/vendor.hpp"

#include <json.hpp>

#include "ooc/errors.hpp"

namespace ooc {

using nlohmann::json;

VendorMapping parse_vendor_mapping(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("vendor mapping: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object()) {
        throw ValidationError("vendor mapping: top-level value must be an object");
    }
    VendorMapping mapping;
    if (doc.contains("labels_path")) mapping.labels_path = doc["labels_path"].get<std::string>();
    if (doc.contains("name_field")) mapping.name_field = doc["name_field"].get<std::string>();
    if (doc.contains("confidence_field")) {
        mapping.confidence_field = doc["confidence_field"].get<std::string>();
    }
    if (doc.contains("confidence_scale")) {
        mapping.confidence_scale = doc["confidence_scale"].get<double>();
    }
    if (!(mapping.confidence_scale > 0.0)) {
        throw ValidationError("vendor mapping: confidence_scale must be > 0");
    }
    return mapping;
}

std::string write_vendor_mapping(const VendorMapping& mapping) {
    json doc{{"labels_path", mapping.labels_path},
             {"name_field", mapping.name_field},
             {"confidence_field", mapping.confidence_field},
             {"confidence_scale", mapping.confidence_scale}};
    return doc.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        if (dot == std::string::npos) {
            parts.push_back(path.substr(start));
            break;
        }
        parts.push_back(path.substr(start, dot - start));
        start = dot + 1;
    }
    return parts;
}

}  // namespace

std::vector<RawLabel> map_vendor_response(std::string_view body, const VendorMapping& mapping) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw MappingError("vendor response is not valid JSON: " + std::string(e.what()),
                           mapping.labels_path);
    }

    const json* node = &doc;
    std::string walked;
    for (const std::string& part : split_path(mapping.labels_path)) {
        walked = walked.empty() ? part : walked + "." + part;
        if (!node->is_object() || !node->contains(part)) {
            throw MappingError("vendor response has no field \"" + walked + "\"", walked);
        }
        node = &(*node)[part];
    }
    if (!node->is_array()) {
        throw MappingError("vendor response field \"" + mapping.labels_path +
                               "\" is not an array",
                           mapping.labels_path);
    }

    std::vector<RawLabel> labels;
    labels.reserve(node->size());
    for (std::size_t i = 0; i < node->size(); ++i) {
        const json& item = (*node)[i];
        const std::string base = mapping.labels_path + "[" + std::to_string(i) + "].";
        if (!item.is_object() || !item.contains(mapping.name_field) ||
            !item[mapping.name_field].is_string()) {
            throw MappingError("vendor response has no field \"" + base + mapping.name_field +
                                   "\"",
                               base + mapping.name_field);
        }
        if (!item.contains(mapping.confidence_field) ||
            !item[mapping.confidence_field].is_number()) {
            throw MappingError("vendor response has no field \"" + base +
                                   mapping.confidence_field + "\"",
                               base + mapping.confidence_field);
        }
        const double vendor_value = item[mapping.confidence_field].get<double>();
        labels.push_back({item[mapping.name_field].get<std::string>(),
                          vendor_value / mapping.confidence_scale * 100.0});
    }
    return labels;
}

}  // namespace ooc
