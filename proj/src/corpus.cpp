#include "afrisynth/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::string_view to_string(ArticleSource source) noexcept {
    switch (source) {
        case ArticleSource::Wikipedia: return "wikipedia";
        case ArticleSource::Web: return "web";
        case ArticleSource::Other: return "other";
    }
    return "other";
}

ArticleSource parse_article_source(std::string_view text) noexcept {
    const auto lower = ascii_lower(text);
    if (lower == "wikipedia") return ArticleSource::Wikipedia;
    if (lower == "web") return ArticleSource::Web;
    return ArticleSource::Other;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    for (auto w : split_words(text)) {
        if (!out.empty()) out.push_back(' ');
        out.append(w);
    }
    return out;
}

std::string truncate_words(std::string_view text, std::size_t limit) {
    if (limit == 0) throw std::invalid_argument("truncate_words: limit must be >= 1");
    const auto words = split_words(text);
    std::string out;
    const std::size_t n = std::min(limit, words.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out.push_back(' ');
        out.append(words[i]);
    }
    return out;
}

nlohmann::ordered_json to_json(const ArticleDoc& doc) {
    nlohmann::ordered_json j;
    j["doc_id"] = doc.doc_id;
    j["title"] = doc.title;
    j["body"] = doc.body;
    j["source"] = to_string(doc.source);
    j["language_hint"] = doc.language_hint ? nlohmann::ordered_json(*doc.language_hint) : nlohmann::ordered_json(nullptr);
    return j;
}

ArticleDoc article_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Schema, "article record is not an object");
    if (!j.contains("title") || !j["title"].is_string()) throw Error(ErrorKind::Schema, "missing string field 'title'");
    if (!j.contains("body") || !j["body"].is_string()) throw Error(ErrorKind::Schema, "missing string field 'body'");
    ArticleDoc doc;
    doc.title = normalize_whitespace(j["title"].get<std::string>());
    doc.body = normalize_whitespace(j["body"].get<std::string>());
    if (j.contains("source") && j["source"].is_string()) doc.source = parse_article_source(j["source"].get<std::string>());
    if (j.contains("language_hint") && j["language_hint"].is_string()) {
        doc.language_hint = j["language_hint"].get<std::string>();
    }
    doc.doc_id = content_id({to_string(doc.source), doc.title});
    return doc;
}

namespace {

void append_doc(LoadResult& result, std::unordered_set<std::string>& seen, ArticleDoc doc) {
    if (doc.body.empty()) {
        ++result.empty_bodies_dropped;
        return;
    }
    if (!seen.insert(doc.doc_id).second) {
        ++result.duplicate_ids_dropped;
        return;
    }
    result.docs.push_back(std::move(doc));
}

}  // namespace

LoadResult load_articles(const std::filesystem::path& path, ArticleFormat format) {
    namespace fs = std::filesystem;
    LoadResult result;
    std::unordered_set<std::string> seen;

    if (format == ArticleFormat::Jsonl) {
        if (!fs::is_regular_file(path)) throw Error(ErrorKind::Io, path.string() + " is not a file");
        for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
            try {
                append_doc(result, seen, article_from_json(j));
            } catch (const Error& e) {
                throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
            }
        });
        return result;
    }

    if (!fs::is_directory(path)) throw Error(ErrorKind::Io, path.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        ArticleDoc doc;
        doc.title = file.stem().string();
        doc.body = normalize_whitespace(read_file(file));
        doc.source = ArticleSource::Other;
        doc.doc_id = content_id({to_string(doc.source), doc.title});
        append_doc(result, seen, std::move(doc));
    }
    return result;
}

void write_articles(const std::filesystem::path& path, const std::vector<ArticleDoc>& docs) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(docs.size());
    for (const auto& d : docs) rows.push_back(to_json(d));
    write_file_atomic(path, to_jsonl(rows));
}

std::vector<ArticleDoc> read_articles(const std::filesystem::path& path) {
    std::vector<ArticleDoc> docs;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            auto doc = article_from_json(j);
            if (j.contains("doc_id") && j["doc_id"].is_string()) doc.doc_id = j["doc_id"].get<std::string>();
            docs.push_back(std::move(doc));
        } catch (const Error& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return docs;
}

}  // namespace afrisynth
