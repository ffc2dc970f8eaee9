#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/gateway.hpp"
#include "afrisynth/persona.hpp"
#include "afrisynth/record.hpp"

namespace afrisynth {

/// Ordered (language code, count) pairs; order fixes processing order.
using LanguageQuota = std::vector<std::pair<std::string, std::size_t>>;

struct SeedExemplar {
    std::string exemplar_id;
    std::string language;
    std::string prompt_text;
};

std::vector<SeedExemplar> read_exemplars(const std::filesystem::path& path);

struct ProblemDraft {
    std::string draft_id;
    std::string persona_id;
    std::string language;
    std::string prompt_text;
    std::string seed_exemplar_id;
};

/// Math uses the arithmetic word-problem template; Generic the open-ended
/// instruction template.
enum class TaskMode { Math, Generic };

ChatRequest problem_request(const Persona& persona, const std::string& language, const SeedExemplar& exemplar,
                            const Gateway& gateway, TaskMode mode = TaskMode::Math);
/// Expects {"prompt": ..., "language": ...}; the returned language (code,
/// name or alias) must resolve to `language`.
ProblemDraft parse_problem_reply(std::string_view raw, const Persona& persona, const std::string& language,
                                 const SeedExemplar& exemplar);
ProblemDraft gen_math_problem(const Persona& persona, const std::string& language, const SeedExemplar& exemplar,
                              Gateway& gateway, TaskMode mode = TaskMode::Math);

ChatRequest solution_request(const ProblemDraft& draft, const Gateway& gateway);
/// Throws AnswerExtractionFailure when no final answer can be read.
InstructionRecord parse_solution_reply(std::string_view raw, const ProblemDraft& draft);
InstructionRecord gen_solution(const ProblemDraft& draft, Gateway& gateway);

struct SynthesisOptions {
    /// Attempts per language beyond its quota before giving up.
    std::size_t extra_attempts_per_language = 0;  // 0: same as the quota
    TaskMode mode = TaskMode::Math;
};

struct SynthesisFailure {
    std::string language;
    std::string persona_id;
    std::string stage;  // "problem" | "solution"
    std::string reason;
};

struct SynthesisResult {
    std::vector<InstructionRecord> records;
    std::vector<SynthesisFailure> failures;
    std::map<std::string, std::size_t> unmet;  // language -> missing count

    [[nodiscard]] bool quota_met() const noexcept { return unmet.empty(); }
    nlohmann::ordered_json report() const;
};

/// Fills each language's quota. Personas are drawn round-robin from `personas`
/// (one shared cursor), never twice for the same language; a failed attempt
/// moves on to the next persona until the language's attempt budget or the
/// pool runs out, which is reported in `unmet`.
SynthesisResult synthesize_batch(std::span<const Persona> personas, const LanguageQuota& quota,
                                 std::span<const SeedExemplar> exemplars, Gateway& gateway,
                                 const SynthesisOptions& options = {});

}  // namespace afrisynth
