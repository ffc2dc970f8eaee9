#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace afrisynth {

enum class RecordSource { Synthetic, TranslatedBigmath, TranslatedOpenmath };

std::string_view to_string(RecordSource source) noexcept;
RecordSource parse_record_source(std::string_view text);

/// One instruction-tuning example: prompt, step-by-step response and the
/// extracted final answer, in one language.
struct InstructionRecord {
    std::string record_id;  // content_id(language, prompt, response)
    std::string language;
    std::string prompt;
    std::string response;
    std::string final_answer;
    RecordSource source = RecordSource::Synthetic;
    std::string provenance;  // persona_id or source pair_id
    std::size_t arithmetic_lines = 0;

    friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

std::string record_id_for(std::string_view language, std::string_view prompt, std::string_view response);

nlohmann::ordered_json to_json(const InstructionRecord& record);
/// Throws SchemaError on missing/mistyped fields or an empty final_answer.
InstructionRecord record_from_json(const nlohmann::json& j);

void write_records(const std::filesystem::path& path, const std::vector<InstructionRecord>& records);
std::vector<InstructionRecord> read_records(const std::filesystem::path& path);

}  // namespace afrisynth
