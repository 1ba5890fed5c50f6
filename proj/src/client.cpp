#include "ooc/client.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "ooc/errors.hpp"
#include "ooc/io_util.hpp"

namespace ooc {

using nlohmann::json;

EndpointConfig parse_endpoint_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("endpoint config: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object() || !doc.contains("base_url") || !doc["base_url"].is_string()) {
        throw ValidationError("endpoint config: missing string field \"base_url\"");
    }
    EndpointConfig config;
    config.base_url = doc["base_url"].get<std::string>();
    if (doc.contains("path")) config.path = doc["path"].get<std::string>();
    if (doc.contains("image_mode")) config.image_mode = doc["image_mode"].get<std::string>();
    if (doc.contains("image_field")) config.image_field = doc["image_field"].get<std::string>();
    if (doc.contains("api_key_header")) {
        config.api_key_header = doc["api_key_header"].get<std::string>();
    }
    if (doc.contains("cache_dir")) config.cache_dir = doc["cache_dir"].get<std::string>();
    if (doc.contains("timeout_seconds")) {
        config.timeout_seconds = doc["timeout_seconds"].get<double>();
    }
    if (config.image_mode != "field" && config.image_mode != "upload") {
        throw ValidationError("endpoint config: image_mode must be \"field\" or \"upload\"");
    }
    if (!(config.timeout_seconds > 0.0)) {
        throw ValidationError("endpoint config: timeout_seconds must be > 0");
    }
    return config;
}

std::string write_endpoint_config(const EndpointConfig& config) {
    json doc{{"base_url", config.base_url},
             {"path", config.path},
             {"image_mode", config.image_mode},
             {"image_field", config.image_field},
             {"api_key_header", config.api_key_header},
             {"cache_dir", config.cache_dir},
             {"timeout_seconds", config.timeout_seconds}};
    return doc.dump(2) + "\n";
}

std::string cache_path_for(const EndpointConfig& endpoint, const std::string& image_ref) {
    if (endpoint.cache_dir.empty()) return {};
    const std::string key =
        fnv1a64_hex(endpoint.base_url + "\n" + endpoint.path + "\n" + image_ref);
    return (std::filesystem::path(endpoint.cache_dir) / (key + ".json")).string();
}

namespace {

// One mutex per cache file so concurrent fetches of the same key cannot
// interleave their writes.
std::mutex& cache_key_mutex(const std::string& cache_path) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto& slot = registry[cache_path];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

DetectionRecord single_record_from_fixture(const std::string& text, const std::string& where) {
    std::vector<DetectionRecord> records = parse_fixture(text);
    if (records.size() != 1) {
        throw ValidationError(where + ": expected exactly one fixture entry, found " +
                              std::to_string(records.size()));
    }
    return std::move(records.front());
}

}  // namespace

DetectionRecord fetch_detections(const EndpointConfig& endpoint, const std::string& image_ref,
                                 const VendorMapping& mapping) {
    const std::string cache_path = cache_path_for(endpoint, image_ref);
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        return single_record_from_fixture(read_file(cache_path), "cache " + cache_path);
    }

    const char* api_key = nullptr;
    if (!endpoint.api_key_header.empty()) {
        api_key = std::getenv(kApiKeyEnvVar);
        if (api_key == nullptr || *api_key == '\0') {
            throw ValidationError(std::string("fetch_detections: environment variable ") +
                                  kApiKeyEnvVar + " is not set");
        }
    }

    httplib::Client client(endpoint.base_url);
    const auto timeout_ms = static_cast<time_t>(endpoint.timeout_seconds * 1000.0);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(0, timeout_ms * 1000);
    httplib::Headers headers;
    if (api_key != nullptr) {
        headers.emplace(endpoint.api_key_header, api_key);
    }

    httplib::Result result;
    if (endpoint.image_mode == "upload") {
        std::string bytes = read_file(image_ref);
        result = client.Post(endpoint.path, headers, bytes, "application/octet-stream");
    } else {
        const json body{{endpoint.image_field, image_ref}};
        result = client.Post(endpoint.path, headers, body.dump(), "application/json");
    }

    if (!result) {
        throw RemoteError("fetch_detections: transport failure talking to " +
                              endpoint.base_url + " (" + httplib::to_string(result.error()) +
                              ")",
                          /*retryable=*/true);
    }
    if (result->status < 200 || result->status >= 300) {
        const bool retryable = result->status >= 500 || result->status == 429;
        throw RemoteError("fetch_detections: endpoint returned status " +
                              std::to_string(result->status),
                          retryable, result->status);
    }

    DetectionRecord record = canonicalize(map_vendor_response(result->body, mapping), image_ref);

    if (!cache_path.empty()) {
        std::lock_guard<std::mutex> lock(cache_key_mutex(cache_path));
        std::filesystem::create_directories(endpoint.cache_dir);
        atomic_write(cache_path, write_fixture({record}));
    }
    return record;
}

}  // namespace ooc
