#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace afrisynth {

enum class ArticleSource { Wikipedia, Web, Other };

std::string_view to_string(ArticleSource source) noexcept;
ArticleSource parse_article_source(std::string_view text) noexcept;

struct ArticleDoc {
    std::string doc_id;  // content_id(source, title)
    std::string title;
    std::string body;
    ArticleSource source = ArticleSource::Other;
    std::optional<std::string> language_hint;

    friend bool operator==(const ArticleDoc&, const ArticleDoc&) = default;
};

enum class ArticleFormat { Jsonl, PlainDir };

struct LoadResult {
    std::vector<ArticleDoc> docs;
    std::size_t empty_bodies_dropped = 0;
    std::size_t duplicate_ids_dropped = 0;
};

/// jsonl: one {"title","body","source","language_hint"} object per line.
/// plain_dir: every regular file in the directory, sorted by name; the file
/// stem becomes the title. Bodies are whitespace-normalized; empty ones are
/// dropped and counted.
LoadResult load_articles(const std::filesystem::path& path, ArticleFormat format);

/// First `limit` whitespace-delimited words joined by single spaces.
std::string truncate_words(std::string_view text, std::size_t limit);

/// Collapses every whitespace run to one space and trims the ends.
std::string normalize_whitespace(std::string_view text);

nlohmann::ordered_json to_json(const ArticleDoc& doc);
ArticleDoc article_from_json(const nlohmann::json& j);

void write_articles(const std::filesystem::path& path, const std::vector<ArticleDoc>& docs);
std::vector<ArticleDoc> read_articles(const std::filesystem::path& path);

}  // namespace afrisynth
