#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace afrisynth {

struct Language {
    std::string code;  // ISO 639-3
    std::string name;
    std::vector<std::string> aliases;
};

/// Yoruba, Igbo, Hausa, Swahili, isiZulu, Nigerian Pidgin, Somali, Afrikaans, Arabic.
const std::vector<std::string>& default_target_languages();

/// Known languages: the default targets plus English, French and a few other
/// African languages that show up in evaluation sets.
const std::vector<Language>& known_languages();

/// Resolves a code, name or alias (case-insensitive) to a language code.
std::optional<std::string> resolve_language(std::string_view tag);

/// Display name for prompts; unknown codes map to themselves.
std::string language_name(std::string_view code);

}  // namespace afrisynth
