#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace evanno {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temp file, flushes, then renames over `path`.
void atomic_write_text(const std::filesystem::path& path, std::string_view content);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Two-space indented JSON with a trailing newline, written atomically.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace evanno
