#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ooc/detection.hpp"

namespace ooc {

// Declarative description of where labels live in a vendor response.
// labels_path is a dot-separated path to the label array; confidence_scale
// is the divisor that maps the vendor's confidence range onto [0, 1]. The
// defaults match the common {"Labels": [{"Name", "Confidence"}]} shape.
struct VendorMapping {
    std::string labels_path = "Labels";
    std::string name_field = "Name";
    std::string confidence_field = "Confidence";
    double confidence_scale = 100.0;
};

// Mapping file: {"labels_path", "name_field", "confidence_field",
// "confidence_scale"}. Missing keys keep their defaults; a non-positive
// scale raises ValidationError.
VendorMapping parse_vendor_mapping(std::string_view text);
std::string write_vendor_mapping(const VendorMapping& mapping);

// Extracts raw labels from a vendor response body. A body that is not JSON
// or is missing a mapped field raises MappingError naming the field path,
// e.g. "Labels[0].Name".
std::vector<RawLabel> map_vendor_response(std::string_view body, const VendorMapping& mapping);

}  // namespace ooc
