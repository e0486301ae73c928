#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace sentinel::util {

// CRC-32C (Castagnoli polynomial, reflected). Used as the trailing checksum
// of the embedding model file and for content fingerprints.
std::uint32_t crc32c(std::span<const std::byte> data, std::uint32_t crc = 0);
std::uint32_t crc32c(std::string_view data, std::uint32_t crc = 0);
std::uint32_t crc32c_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view data);

// RFC 3339 timestamps <-> unix seconds (UTC). Fractional seconds are parsed
// and truncated; numeric UTC offsets are applied.
std::int64_t parse_rfc3339(std::string_view text);
std::string format_rfc3339(std::int64_t unix_seconds);
int utc_year(std::int64_t unix_seconds);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string to_lower(std::string_view text);

}  // namespace sentinel::util
