#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace afrisynth {

/// 16-hex-character identifier derived from SHA-256 over the length-prefixed
/// parts, so ("ab","c") and ("a","bc") never collide.
std::string content_id(std::initializer_list<std::string_view> parts);
std::string content_id(const std::vector<std::string>& parts);

/// Maximal runs of non-whitespace characters.
std::vector<std::string_view> split_words(std::string_view text);
std::size_t word_count(std::string_view text);

/// ASCII lowercase; bytes >= 0x80 are passed through untouched.
std::string ascii_lower(std::string_view text);
std::string trim(std::string_view text);

/// Write to `<path>.tmp` then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Calls `on_record(line_number, value)` for each non-blank line. Parse
/// failures raise SchemaError naming the file and 1-based line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& on_record);

/// Seeded Fisher-Yates permutation of [0, n). Uses mt19937_64 with rejection
/// sampling, so the result is identical across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

std::string to_jsonl(const std::vector<nlohmann::ordered_json>& rows);

}  // namespace afrisynth
