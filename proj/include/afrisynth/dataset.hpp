#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/minhash.hpp"
#include "afrisynth/record.hpp"

namespace afrisynth {

struct DatasetManifest {
    std::string name;
    std::vector<std::string> languages;
    std::size_t per_language_count = 0;
    std::map<std::string, std::size_t> sources;  // by RecordSource name
    std::string eval_set_name;
    std::size_t decontamination_removed = 0;
    std::size_t exact_duplicates_removed = 0;
    std::uint64_t seed = 0;
    std::string created_at;  // ISO-8601 UTC

    /// Throws SchemaError unless per_language_count * |languages| == total.
    void check(std::size_t total_records) const;
    nlohmann::ordered_json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
    std::vector<InstructionRecord> records;
    DatasetManifest manifest;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// `<path>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);

/// Writes the records as JSONL plus the manifest sidecar, both atomically.
void write_jsonl(const Dataset& dataset, const std::filesystem::path& path);
/// Reads records and the manifest sidecar. SchemaError names the bad line.
Dataset read_jsonl(const std::filesystem::path& path);

/// UTC timestamp; honours SOURCE_DATE_EPOCH for reproducible builds.
std::string current_timestamp();

struct EvalQuestion {
    std::string question;
    std::string answer;
    std::string language;
};

/// JSONL {question, answer, language}.
std::vector<EvalQuestion> read_eval_set(const std::filesystem::path& path);

struct AssemblyOptions {
    std::string name = "dataset";
    std::string eval_set_name;
    std::uint64_t seed = 0;
    DedupParams dedup;
    std::string created_at;  // empty: current_timestamp()
};

struct AssemblyResult {
    Dataset dataset;
    std::vector<DroppedPair> decontaminated;  // dropped_id = record_id
};

/// Exact-duplicate removal by record_id, decontamination of prompts against
/// the eval questions, then a seeded uniform draw of exactly
/// `per_language_count` records per language. Records in other languages are
/// ignored. Throws InsufficientRecords if a language falls short.
AssemblyResult assemble(std::span<const InstructionRecord> records, const std::vector<std::string>& languages,
                        std::size_t per_language_count, std::span<const std::string> eval_questions,
                        const AssemblyOptions& options);

struct Quantiles {
    double p0 = 0, p25 = 0, p50 = 0, p75 = 0, p100 = 0;
    friend bool operator==(const Quantiles&, const Quantiles&) = default;
};

/// Linear interpolation between closest ranks (position q * (n - 1)).
Quantiles quantiles(std::vector<double> values);

struct DatasetStats {
    std::size_t total = 0;
    std::map<std::string, std::size_t> per_language;
    std::map<std::string, std::size_t> per_source;
    Quantiles prompt_words;
    Quantiles response_words;

    nlohmann::ordered_json to_json() const;
};

DatasetStats stats(std::span<const InstructionRecord> records);

}  // namespace afrisynth
