#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace evoquery {

// FNV-1a, used for config fingerprints and run ids. Not cryptographic.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory followed by rename, so
// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split(std::string_view text, char sep);

// Glob with '*' (any run) and '?' (single char); everything else literal.
bool glob_match(std::string_view pattern, std::string_view text);

// Static partition of [0, n) across up to `workers` threads. Falls back to a
// plain loop when workers <= 1 or n is small. `fn` must be safe to call
// concurrently for distinct indices.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace evoquery
