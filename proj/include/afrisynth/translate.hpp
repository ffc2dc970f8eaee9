#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/gateway.hpp"
#include "afrisynth/record.hpp"
#include "afrisynth/synthesis.hpp"

namespace afrisynth {

enum class SourceDataset { Bigmath, Openmath };

std::string_view to_string(SourceDataset dataset) noexcept;

struct SourcePair {
    std::string pair_id;
    std::string problem;
    std::string answer;
    SourceDataset dataset = SourceDataset::Bigmath;
};

/// JSONL {pair_id, problem, answer, dataset}. Duplicate pair_ids are a schema error.
std::vector<SourcePair> read_source_pairs(const std::filesystem::path& path);

struct TranslationAssignment {
    std::string pair_id;
    std::string target_language;

    friend bool operator==(const TranslationAssignment&, const TranslationAssignment&) = default;
};

/// Seeded permutation of `pairs`, cut into consecutive runs per language in
/// quota order. No pair is assigned twice. Throws InsufficientPairs.
std::vector<TranslationAssignment> sample_assignments(std::span<const SourcePair> pairs,
                                                      const LanguageQuota& per_language, std::uint64_t seed);

struct TranslationCheck {
    std::vector<std::string> missing_in_problem;
    std::vector<std::string> missing_in_response;

    [[nodiscard]] bool passed() const noexcept { return missing_in_problem.empty() && missing_in_response.empty(); }
    [[nodiscard]] std::string describe() const;
};

/// Every digit sequence (group separators removed) of the source problem must
/// appear in the translated problem, and likewise answer -> response.
TranslationCheck verify_translation(const SourcePair& source, std::string_view translated_problem,
                                    std::string_view translated_response);

ChatRequest translation_request(const SourcePair& pair, const std::string& language, const Gateway& gateway);
/// Expects {"problem_translation", "step_by_step_response"}. Throws
/// ParseFailure, NumberPreservationFailure or AnswerExtractionFailure.
InstructionRecord parse_translation_reply(std::string_view raw, const SourcePair& pair, const std::string& language);
InstructionRecord translate_pair(const SourcePair& pair, const std::string& language, Gateway& gateway);

struct TranslationFailure {
    std::string pair_id;
    std::string language;
    std::string reason;
};

struct TranslationResult {
    std::vector<InstructionRecord> records;
    std::vector<TranslationAssignment> assignments;  // every pair ever sent, in send order
    std::vector<TranslationFailure> failures;
    std::map<std::string, std::size_t> unmet;

    [[nodiscard]] bool quota_met() const noexcept { return unmet.empty(); }
    nlohmann::ordered_json report() const;
};

/// Translates until each language has its count. A failed pair is consumed
/// (never reassigned) and replaced by the next unused pair of the same seeded
/// permutation, so every pair_id appears in at most one assignment.
TranslationResult translate_batch(std::span<const SourcePair> pairs, const LanguageQuota& per_language,
                                  std::uint64_t seed, Gateway& gateway);

}  // namespace afrisynth
