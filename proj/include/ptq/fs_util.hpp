#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ptq {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ptq
