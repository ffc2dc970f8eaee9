#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/corpus.hpp"
#include "afrisynth/gateway.hpp"

namespace afrisynth {

enum class PersonaStage { FromText, Expanded };

std::string_view to_string(PersonaStage stage) noexcept;

struct Persona {
    std::string persona_id;
    std::vector<std::string> countries;
    std::vector<std::string> languages;
    std::string description;
    PersonaStage stage = PersonaStage::FromText;
    std::string parent_id;  // doc_id for FromText, persona_id for Expanded

    friend bool operator==(const Persona&, const Persona&) = default;
};

/// Pure function of (description, countries, languages).
std::string persona_id_for(std::string_view description, const std::vector<std::string>& countries,
                           const std::vector<std::string>& languages);

enum class RejectionKind { NotObject, MissingField, WrongType, Empty };

struct PersonaRejection {
    RejectionKind kind;
    std::string field;

    [[nodiscard]] std::string describe() const;
    friend bool operator==(const PersonaRejection&, const PersonaRejection&) = default;
};

using PersonaCheck = std::variant<Persona, PersonaRejection>;

/// Accepts {"countries": [str...], "languages": [str...], "persona": str}
/// with every list and string non-empty after trimming.
PersonaCheck validate_persona(const nlohmann::json& value, PersonaStage stage, std::string parent_id);

/// Outcome of parsing one model reply.
struct PersonaYield {
    std::vector<Persona> personas;
    std::vector<PersonaRejection> rejections;
    std::size_t overflow_dropped = 0;  // entries beyond the cap
    bool parse_failed = false;         // no usable JSON at all

    [[nodiscard]] bool empty_yield() const noexcept { return personas.empty(); }
};

inline constexpr std::size_t kExpansionCap = 3;

/// Text-to-persona replies may hold one object or a list of them.
PersonaYield parse_text_personas(std::string_view raw, const std::string& doc_id);
/// Persona-to-persona replies must be a list; at most kExpansionCap kept.
PersonaYield parse_expanded_personas(std::string_view raw, const Persona& seed);

/// Seed persona in the schema the expansion prompt shows the model.
std::string persona_prompt_json(const Persona& persona);

ChatRequest text_to_personas_request(const ArticleDoc& article, const Gateway& gateway);
ChatRequest expand_personas_request(const Persona& seed, const Gateway& gateway);

/// Gateway errors propagate; an empty yield is reported, not thrown.
PersonaYield text_to_personas(const ArticleDoc& article, Gateway& gateway);
PersonaYield expand_personas(const Persona& seed, Gateway& gateway);

struct PersonaStageReport {
    std::vector<Persona> personas;
    std::size_t inputs = 0;
    std::size_t empty_yields = 0;
    std::size_t gateway_failures = 0;
    std::size_t rejected = 0;
    std::size_t overflow_dropped = 0;
    std::size_t already_known = 0;  // expanded persona identical to one already in the pool

    nlohmann::ordered_json summary() const;
};

PersonaStageReport text_to_personas_batch(std::span<const ArticleDoc> articles, Gateway& gateway);

/// Runs `depth` persona-to-persona rounds, each expanding the previous
/// round's output. Expanded personas whose id is already in `seeds` or an
/// earlier round are dropped so parent links stay acyclic.
PersonaStageReport expand_personas_batch(std::span<const Persona> seeds, Gateway& gateway, int depth = 1);

nlohmann::ordered_json to_json(const Persona& persona);
Persona persona_from_json(const nlohmann::json& j);

void write_personas(const std::filesystem::path& path, const std::vector<Persona>& personas);
std::vector<Persona> read_personas(const std::filesystem::path& path);

}  // namespace afrisynth
