#pragma once

#include <filesystem>
#include <string>

namespace spraysim {

// Writes via a sibling temp file followed by a rename, so interrupted runs
// never leave truncated artifacts behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace spraysim
