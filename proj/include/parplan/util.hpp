#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "parplan/json_io.hpp"

namespace parplan {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never see a partial file. Parent directories are created. Throws kIo.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// One JSON value per non-blank line. Throws kIo / kSchemaMismatch with the
// line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

unsigned default_jobs() noexcept;

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown (by index order of discovery) is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace parplan
