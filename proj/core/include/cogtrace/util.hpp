#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace cogtrace {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, fsyncs, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// fsync on a directory so a completed rename survives a crash.
void sync_directory(const std::filesystem::path& dir);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);
std::string base64_encode(std::span<const unsigned char> bytes);

/// Current UTC time, ISO-8601 with seconds precision.
std::string utc_timestamp_now();

std::string trim(std::string_view s);

}  // namespace cogtrace
