#pragma once

#include <string>
#include <string_view>

#include "ooc/detection.hpp"
#include "ooc/vendor.hpp"

namespace ooc {

// Where and how to reach a detection endpoint. The credential is never part
// of the config; it is read from the OOC_DETECTOR_API_KEY environment
// variable and injected as the api_key_header. image_mode "field" sends the
// image reference as a JSON body field; "upload" posts the referenced
// file's bytes.
struct EndpointConfig {
    std::string base_url;                    // e.g. "http://localhost:8089"
    std::string path = "/detect";
    std::string image_mode = "field";        // "field" | "upload"
    std::string image_field = "image";
    std::string api_key_header = "x-api-key";  // empty disables auth
    std::string cache_dir;                   // empty disables caching
    double timeout_seconds = 10.0;
};

EndpointConfig parse_endpoint_config(std::string_view text);
std::string write_endpoint_config(const EndpointConfig& config);

inline constexpr const char* kApiKeyEnvVar = "OOC_DETECTOR_API_KEY";

// Fetches detections for one image reference and canonicalizes them through
// the vendor mapping. With caching enabled, responses are persisted as
// single-entry fixture files keyed by (endpoint, image_ref) and reruns are
// served from disk without touching the network; cache writes are
// serialized per key, so distinct image_refs may be fetched concurrently.
//
// Errors: ValidationError when the credential is required but unset;
// RemoteError on transport failures (retryable) and non-2xx statuses;
// MappingError when the response shape does not match the mapping.
DetectionRecord fetch_detections(const EndpointConfig& endpoint, const std::string& image_ref,
                                 const VendorMapping& mapping);

// Cache file path for a given (endpoint, image_ref); empty when caching is
// disabled.
std::string cache_path_for(const EndpointConfig& endpoint, const std::string& image_ref);

}  // namespace ooc
