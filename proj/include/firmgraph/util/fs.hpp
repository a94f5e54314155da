#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace firmgraph::util {

// Whole-file read. Throws NotFoundError when the file is missing, Error on
// any other I/O failure.
std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temporary and renames it over `path`, so readers
// never observe a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace firmgraph::util
