#include "afrisynth/synthesis.hpp"

#include <unordered_set>

#include "afrisynth/error.hpp"
#include "afrisynth/languages.hpp"
#include "afrisynth/numerals.hpp"
#include "afrisynth/prompts.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::vector<SeedExemplar> read_exemplars(const std::filesystem::path& path) {
    std::vector<SeedExemplar> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            SeedExemplar e{j.at("exemplar_id").get<std::string>(), j.at("language").get<std::string>(),
                           j.at("prompt_text").get<std::string>()};
            if (e.prompt_text.empty()) throw Error(ErrorKind::Schema, "empty prompt_text");
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

ChatRequest problem_request(const Persona& persona, const std::string& language, const SeedExemplar& exemplar,
                            const Gateway& gateway, TaskMode mode) {
    if (exemplar.language != language) {
        throw std::invalid_argument("exemplar " + exemplar.exemplar_id + " is not in " + language);
    }
    const auto name = language_name(language);
    auto p = mode == TaskMode::Math ? prompts::math_problem(name, exemplar.prompt_text, persona.description, name)
                                    : prompts::generic_task(name, exemplar.prompt_text, persona.description, name);
    return gateway.make_request(std::move(p.system), std::move(p.user),
                                "problem:" + language + ":" + persona.persona_id);
}

namespace {

bool language_matches(const std::string& returned, const std::string& requested) {
    if (const auto code = resolve_language(returned)) return *code == requested;
    return ascii_lower(trim(returned)) == ascii_lower(requested);
}

std::string strip_instruction_prefix(std::string text) {
    static constexpr std::string_view kPrefix = "User instruction:";
    text = trim(text);
    if (text.rfind(kPrefix, 0) == 0) text = trim(std::string_view(text).substr(kPrefix.size()));
    return text;
}

}  // namespace

ProblemDraft parse_problem_reply(std::string_view raw, const Persona& persona, const std::string& language,
                                 const SeedExemplar& exemplar) {
    nlohmann::json value;
    try {
        value = extract_json(raw);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseFailure, e.what());
    }
    if (value.is_array() && value.size() == 1) value = value[0];
    if (!value.is_object() || !value.contains("prompt") || !value["prompt"].is_string() ||
        !value.contains("language") || !value["language"].is_string()) {
        throw Error(ErrorKind::ParseFailure, "expected {\"prompt\": str, \"language\": str}");
    }
    const auto tag = value["language"].get<std::string>();
    if (!language_matches(tag, language)) {
        throw Error(ErrorKind::LanguageMismatch, "requested " + language + ", model answered '" + tag + "'");
    }
    ProblemDraft d;
    d.persona_id = persona.persona_id;
    d.language = language;
    d.prompt_text = strip_instruction_prefix(value["prompt"].get<std::string>());
    if (d.prompt_text.empty()) throw Error(ErrorKind::ParseFailure, "empty prompt");
    d.seed_exemplar_id = exemplar.exemplar_id;
    d.draft_id = content_id({d.persona_id, d.language, d.prompt_text});
    return d;
}

ProblemDraft gen_math_problem(const Persona& persona, const std::string& language, const SeedExemplar& exemplar,
                              Gateway& gateway, TaskMode mode) {
    const auto response = gateway.complete(problem_request(persona, language, exemplar, gateway, mode));
    return parse_problem_reply(response.raw_text, persona, language, exemplar);
}

ChatRequest solution_request(const ProblemDraft& draft, const Gateway& gateway) {
    auto p = prompts::math_response(draft.prompt_text);
    return gateway.make_request(std::move(p.system), std::move(p.user), "solution:" + draft.draft_id);
}

InstructionRecord parse_solution_reply(std::string_view raw, const ProblemDraft& draft) {
    InstructionRecord r;
    r.language = draft.language;
    r.prompt = draft.prompt_text;
    r.response = std::string(raw);
    if (trim(r.response).empty()) throw Error(ErrorKind::AnswerExtraction, "empty solution");
    try {
        r.final_answer = extract_final_answer(r.response);
    } catch (const Error& e) {
        throw Error(ErrorKind::AnswerExtraction, e.what());
    }
    r.source = RecordSource::Synthetic;
    r.provenance = draft.persona_id;
    r.arithmetic_lines = count_arithmetic_lines(r.response);
    r.record_id = record_id_for(r.language, r.prompt, r.response);
    return r;
}

InstructionRecord gen_solution(const ProblemDraft& draft, Gateway& gateway) {
    const auto response = gateway.complete(solution_request(draft, gateway));
    return parse_solution_reply(response.raw_text, draft);
}

nlohmann::ordered_json SynthesisResult::report() const {
    nlohmann::ordered_json j;
    j["records"] = records.size();
    j["quota_met"] = quota_met();
    j["unmet"] = unmet;
    auto fails = nlohmann::ordered_json::array();
    for (const auto& f : failures) {
        fails.push_back({{"language", f.language}, {"persona_id", f.persona_id}, {"stage", f.stage}, {"reason", f.reason}});
    }
    j["failures"] = std::move(fails);
    return j;
}

SynthesisResult synthesize_batch(std::span<const Persona> personas, const LanguageQuota& quota,
                                 std::span<const SeedExemplar> exemplars, Gateway& gateway,
                                 const SynthesisOptions& options) {
    struct LanguageState {
        std::string language;
        std::size_t need = 0;
        std::size_t budget = 0;
        std::size_t attempts = 0;
        std::vector<const SeedExemplar*> exemplars;
        std::unordered_set<std::string> used_personas;
    };

    std::vector<LanguageState> states;
    for (const auto& [language, count] : quota) {
        LanguageState s;
        s.language = language;
        s.need = count;
        s.budget = count + (options.extra_attempts_per_language ? options.extra_attempts_per_language : count);
        for (const auto& e : exemplars) {
            if (e.language == language) s.exemplars.push_back(&e);
        }
        if (count > 0 && s.exemplars.empty()) {
            throw Error(ErrorKind::Config, "no seed exemplar for language " + language);
        }
        states.push_back(std::move(s));
    }

    SynthesisResult result;
    std::unordered_set<std::string> emitted_ids;
    std::size_t cursor = 0;

    // Next persona not yet used for this language, or nullptr if none left.
    auto next_persona = [&](LanguageState& s) -> const Persona* {
        for (std::size_t scanned = 0; scanned < personas.size(); ++scanned) {
            const Persona& p = personas[cursor++ % personas.size()];
            if (s.used_personas.insert(p.persona_id).second) return &p;
        }
        return nullptr;
    };

    struct Attempt {
        LanguageState* state;
        const Persona* persona;
        const SeedExemplar* exemplar;
    };

    for (;;) {
        std::vector<Attempt> attempts;
        for (auto& s : states) {
            for (std::size_t k = 0; k < s.need && s.attempts < s.budget; ++k) {
                const Persona* p = personas.empty() ? nullptr : next_persona(s);
                if (!p) break;
                const SeedExemplar* ex = s.exemplars[s.attempts % s.exemplars.size()];
                ++s.attempts;
                attempts.push_back({&s, p, ex});
            }
        }
        if (attempts.empty()) break;

        std::vector<ChatRequest> problem_reqs;
        problem_reqs.reserve(attempts.size());
        for (const auto& a : attempts) {
            problem_reqs.push_back(problem_request(*a.persona, a.state->language, *a.exemplar, gateway, options.mode));
        }
        const auto problem_resps = gateway.complete_batch(problem_reqs);

        std::vector<std::pair<std::size_t, ProblemDraft>> drafts;
        for (std::size_t i = 0; i < attempts.size(); ++i) {
            const auto& a = attempts[i];
            if (problem_resps[i].finish_reason == FinishReason::Error) {
                result.failures.push_back({a.state->language, a.persona->persona_id, "problem", problem_resps[i].error});
                continue;
            }
            try {
                drafts.emplace_back(i, parse_problem_reply(problem_resps[i].raw_text, *a.persona, a.state->language,
                                                           *a.exemplar));
            } catch (const Error& e) {
                result.failures.push_back({a.state->language, a.persona->persona_id, "problem", e.what()});
            }
        }

        std::vector<ChatRequest> solution_reqs;
        std::unordered_set<std::string> draft_ids;
        std::vector<std::pair<std::size_t, ProblemDraft>> unique_drafts;
        for (auto& [i, d] : drafts) {
            if (!draft_ids.insert(d.draft_id).second) {
                result.failures.push_back({d.language, d.persona_id, "problem", "duplicate draft"});
                continue;
            }
            solution_reqs.push_back(solution_request(d, gateway));
            unique_drafts.emplace_back(i, std::move(d));
        }
        const auto solution_resps = gateway.complete_batch(solution_reqs);

        for (std::size_t k = 0; k < unique_drafts.size(); ++k) {
            const auto& [i, d] = unique_drafts[k];
            LanguageState& s = *attempts[i].state;
            if (solution_resps[k].finish_reason == FinishReason::Error) {
                result.failures.push_back({d.language, d.persona_id, "solution", solution_resps[k].error});
                continue;
            }
            try {
                auto record = parse_solution_reply(solution_resps[k].raw_text, d);
                if (!emitted_ids.insert(record.record_id).second) {
                    result.failures.push_back({d.language, d.persona_id, "solution", "duplicate record"});
                    continue;
                }
                result.records.push_back(std::move(record));
                --s.need;
            } catch (const Error& e) {
                result.failures.push_back({d.language, d.persona_id, "solution", e.what()});
            }
        }
    }

    for (const auto& s : states) {
        if (s.need > 0) result.unmet[s.language] = s.need;
    }
    // Group by language in quota order; within a language keep generation order.
    std::stable_sort(result.records.begin(), result.records.end(), [&](const auto& a, const auto& b) {
        auto rank = [&](const std::string& lang) {
            for (std::size_t i = 0; i < quota.size(); ++i) {
                if (quota[i].first == lang) return i;
            }
            return quota.size();
        };
        return rank(a.language) < rank(b.language);
    });
    return result;
}

}  // namespace afrisynth
