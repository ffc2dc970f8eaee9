#pragma once

#include <string>
#include <string_view>

namespace afrisynth::prompts {

/// A rendered prompt: fixed instructions go in the system message, the
/// per-item inputs in the user message.
struct Prompt {
    std::string system;
    std::string user;
};

Prompt persona_from_text(std::string_view article_text);
/// `seed_persona_json` is the seed persona serialized with the same fields
/// the model is asked to produce.
Prompt persona_expansion(std::string_view seed_persona_json);

Prompt generic_task(std::string_view seed_language, std::string_view seed_prompt,
                    std::string_view persona, std::string_view language);
Prompt math_problem(std::string_view seed_language, std::string_view seed_prompt,
                    std::string_view persona, std::string_view language);
Prompt math_response(std::string_view problem);

Prompt judge(std::string_view question, std::string_view gold_answer, std::string_view generation);
/// Appended on the single re-ask after an unparseable judgment.
inline constexpr std::string_view kJudgeReminder =
    "\n\nEnd your judgment with the score written exactly as [[0]] or [[1]].";

Prompt translation(std::string_view problem, std::string_view answer, std::string_view language);

}  // namespace afrisynth::prompts
