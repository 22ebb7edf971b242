#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fedtrial::io {

// Shortest round-trip decimal form via std::to_chars; '.' separator and no
// locale influence, so metrics files are byte-stable.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// SHA-1 over the git blob preimage "blob <len>\0<content>", hex-encoded.
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

} // namespace fedtrial::io
