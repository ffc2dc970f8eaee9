#include "afrisynth/record.hpp"

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::string_view to_string(RecordSource source) noexcept {
    switch (source) {
        case RecordSource::Synthetic: return "synthetic";
        case RecordSource::TranslatedBigmath: return "translated_bigmath";
        case RecordSource::TranslatedOpenmath: return "translated_openmath";
    }
    return "synthetic";
}

RecordSource parse_record_source(std::string_view text) {
    if (text == "synthetic") return RecordSource::Synthetic;
    if (text == "translated_bigmath") return RecordSource::TranslatedBigmath;
    if (text == "translated_openmath") return RecordSource::TranslatedOpenmath;
    throw Error(ErrorKind::Schema, "unknown record source '" + std::string(text) + "'");
}

std::string record_id_for(std::string_view language, std::string_view prompt, std::string_view response) {
    return content_id({language, prompt, response});
}

nlohmann::ordered_json to_json(const InstructionRecord& r) {
    nlohmann::ordered_json j;
    j["record_id"] = r.record_id;
    j["language"] = r.language;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["final_answer"] = r.final_answer;
    j["source"] = to_string(r.source);
    j["provenance"] = r.provenance;
    j["arithmetic_lines"] = r.arithmetic_lines;
    return j;
}

InstructionRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Schema, "record is not an object");
    const auto str = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_string()) {
            throw Error(ErrorKind::Schema, std::string("missing string field '") + key + "'");
        }
        return j[key].get<std::string>();
    };
    InstructionRecord r;
    r.record_id = str("record_id");
    r.language = str("language");
    r.prompt = str("prompt");
    r.response = str("response");
    r.final_answer = str("final_answer");
    r.source = parse_record_source(str("source"));
    r.provenance = str("provenance");
    if (j.contains("arithmetic_lines")) {
        if (!j["arithmetic_lines"].is_number_unsigned()) {
            throw Error(ErrorKind::Schema, "arithmetic_lines must be a non-negative integer");
        }
        r.arithmetic_lines = j["arithmetic_lines"].get<std::size_t>();
    }
    if (r.final_answer.empty()) throw Error(ErrorKind::Schema, "final_answer is empty");
    if (r.language.empty() || r.prompt.empty() || r.response.empty()) {
        throw Error(ErrorKind::Schema, "language, prompt and response must be non-empty");
    }
    return r;
}

void write_records(const std::filesystem::path& path, const std::vector<InstructionRecord>& records) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(to_json(r));
    write_file_atomic(path, to_jsonl(rows));
}

std::vector<InstructionRecord> read_records(const std::filesystem::path& path) {
    std::vector<InstructionRecord> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            out.push_back(record_from_json(j));
        } catch (const Error& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace afrisynth
