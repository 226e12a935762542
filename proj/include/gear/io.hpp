#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gear {

// Whole-file helpers; failures throw IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

} // namespace gear
