#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ooc {

// Reads a whole file into memory. Throws IoError on failure.
std::string read_file(const std::string& path);

// Writes content to a temporary file in the same directory, then renames it
// over the target, so readers never observe a partial file.
void atomic_write(const std::string& path, std::string_view content);

// FNV-1a 64-bit hash, used for cache keys and fixture checksums.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Shortest decimal representation that parses back to the same double.
// Integral values keep a trailing ".0" so CSV columns stay visibly numeric.
std::string format_double(double value);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& value);

}  // namespace ooc
