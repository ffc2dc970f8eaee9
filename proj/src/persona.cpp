#include "afrisynth/persona.hpp"

#include <unordered_set>

#include "afrisynth/error.hpp"
#include "afrisynth/prompts.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::string_view to_string(PersonaStage stage) noexcept {
    return stage == PersonaStage::FromText ? "from_text" : "expanded";
}

std::string persona_id_for(std::string_view description, const std::vector<std::string>& countries,
                           const std::vector<std::string>& languages) {
    const auto c = nlohmann::json(countries).dump();
    const auto l = nlohmann::json(languages).dump();
    return content_id({description, c, l});
}

std::string PersonaRejection::describe() const {
    switch (kind) {
        case RejectionKind::NotObject: return "NotObject";
        case RejectionKind::MissingField: return "MissingField(" + field + ")";
        case RejectionKind::WrongType: return "WrongType(" + field + ")";
        case RejectionKind::Empty: return "Empty(" + field + ")";
    }
    return "Rejected";
}

namespace {

// Non-empty list of non-empty strings, trimmed.
std::variant<std::vector<std::string>, PersonaRejection> string_list(const nlohmann::json& obj, const char* field) {
    if (!obj.contains(field)) return PersonaRejection{RejectionKind::MissingField, field};
    const auto& v = obj[field];
    if (!v.is_array()) return PersonaRejection{RejectionKind::WrongType, field};
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) return PersonaRejection{RejectionKind::WrongType, field};
        auto s = trim(item.get<std::string>());
        if (s.empty()) return PersonaRejection{RejectionKind::Empty, field};
        out.push_back(std::move(s));
    }
    if (out.empty()) return PersonaRejection{RejectionKind::Empty, field};
    return out;
}

}  // namespace

PersonaCheck validate_persona(const nlohmann::json& value, PersonaStage stage, std::string parent_id) {
    if (!value.is_object()) return PersonaRejection{RejectionKind::NotObject, ""};

    auto countries = string_list(value, "countries");
    if (auto* r = std::get_if<PersonaRejection>(&countries)) return *r;
    auto languages = string_list(value, "languages");
    if (auto* r = std::get_if<PersonaRejection>(&languages)) return *r;

    if (!value.contains("persona")) return PersonaRejection{RejectionKind::MissingField, "persona"};
    if (!value["persona"].is_string()) return PersonaRejection{RejectionKind::WrongType, "persona"};
    auto description = trim(value["persona"].get<std::string>());
    if (description.empty()) return PersonaRejection{RejectionKind::Empty, "persona"};

    Persona p;
    p.countries = std::get<std::vector<std::string>>(std::move(countries));
    p.languages = std::get<std::vector<std::string>>(std::move(languages));
    p.description = std::move(description);
    p.stage = stage;
    p.parent_id = std::move(parent_id);
    p.persona_id = persona_id_for(p.description, p.countries, p.languages);
    return p;
}

namespace {

void collect(PersonaYield& yield, const nlohmann::json& entries, PersonaStage stage, const std::string& parent,
             std::size_t cap) {
    for (const auto& entry : entries) {
        auto checked = validate_persona(entry, stage, parent);
        if (auto* rej = std::get_if<PersonaRejection>(&checked)) {
            yield.rejections.push_back(*rej);
            continue;
        }
        if (cap != 0 && yield.personas.size() >= cap) {
            ++yield.overflow_dropped;
            continue;
        }
        yield.personas.push_back(std::get<Persona>(std::move(checked)));
    }
}

}  // namespace

PersonaYield parse_text_personas(std::string_view raw, const std::string& doc_id) {
    PersonaYield yield;
    nlohmann::json value;
    try {
        value = extract_json(raw);
    } catch (const Error&) {
        yield.parse_failed = true;
        return yield;
    }
    if (value.is_object()) value = nlohmann::json::array({value});
    collect(yield, value, PersonaStage::FromText, doc_id, 0);
    return yield;
}

PersonaYield parse_expanded_personas(std::string_view raw, const Persona& seed) {
    PersonaYield yield;
    nlohmann::json value;
    try {
        value = extract_json(raw);
    } catch (const Error&) {
        yield.parse_failed = true;
        return yield;
    }
    if (!value.is_array()) {
        yield.parse_failed = true;
        yield.rejections.push_back({RejectionKind::WrongType, "<root>"});
        return yield;
    }
    collect(yield, value, PersonaStage::Expanded, seed.persona_id, kExpansionCap);
    return yield;
}

std::string persona_prompt_json(const Persona& persona) {
    nlohmann::ordered_json j;
    j["countries"] = persona.countries;
    j["languages"] = persona.languages;
    j["persona"] = persona.description;
    return j.dump(2);
}

ChatRequest text_to_personas_request(const ArticleDoc& article, const Gateway& gateway) {
    auto p = prompts::persona_from_text(article.body);
    return gateway.make_request(std::move(p.system), std::move(p.user), "persona:" + article.doc_id);
}

ChatRequest expand_personas_request(const Persona& seed, const Gateway& gateway) {
    auto p = prompts::persona_expansion(persona_prompt_json(seed));
    return gateway.make_request(std::move(p.system), std::move(p.user), "expand:" + seed.persona_id);
}

PersonaYield text_to_personas(const ArticleDoc& article, Gateway& gateway) {
    const auto response = gateway.complete(text_to_personas_request(article, gateway));
    return parse_text_personas(response.raw_text, article.doc_id);
}

PersonaYield expand_personas(const Persona& seed, Gateway& gateway) {
    const auto response = gateway.complete(expand_personas_request(seed, gateway));
    return parse_expanded_personas(response.raw_text, seed);
}

nlohmann::ordered_json PersonaStageReport::summary() const {
    nlohmann::ordered_json j;
    j["inputs"] = inputs;
    j["personas"] = personas.size();
    j["empty_yields"] = empty_yields;
    j["gateway_failures"] = gateway_failures;
    j["rejected"] = rejected;
    j["overflow_dropped"] = overflow_dropped;
    j["already_known"] = already_known;
    return j;
}

PersonaStageReport text_to_personas_batch(std::span<const ArticleDoc> articles, Gateway& gateway) {
    PersonaStageReport report;
    std::vector<ChatRequest> requests;
    std::unordered_set<std::string> seen_docs;
    std::vector<const ArticleDoc*> sent;
    for (const auto& a : articles) {
        if (!seen_docs.insert(a.doc_id).second) continue;
        requests.push_back(text_to_personas_request(a, gateway));
        sent.push_back(&a);
    }
    report.inputs = sent.size();
    const auto responses = gateway.complete_batch(requests);
    for (std::size_t i = 0; i < responses.size(); ++i) {
        if (responses[i].finish_reason == FinishReason::Error) {
            ++report.gateway_failures;
            continue;
        }
        auto yield = parse_text_personas(responses[i].raw_text, sent[i]->doc_id);
        report.rejected += yield.rejections.size();
        if (yield.empty_yield()) ++report.empty_yields;
        for (auto& p : yield.personas) report.personas.push_back(std::move(p));
    }
    return report;
}

PersonaStageReport expand_personas_batch(std::span<const Persona> seeds, Gateway& gateway, int depth) {
    PersonaStageReport report;
    std::unordered_set<std::string> known;
    std::vector<Persona> frontier;
    for (const auto& s : seeds) {
        if (known.insert(s.persona_id).second) frontier.push_back(s);
    }

    for (int round = 0; round < depth && !frontier.empty(); ++round) {
        std::vector<ChatRequest> requests;
        requests.reserve(frontier.size());
        for (const auto& s : frontier) requests.push_back(expand_personas_request(s, gateway));
        report.inputs += frontier.size();

        const auto responses = gateway.complete_batch(requests);
        std::vector<Persona> next;
        for (std::size_t i = 0; i < responses.size(); ++i) {
            if (responses[i].finish_reason == FinishReason::Error) {
                ++report.gateway_failures;
                continue;
            }
            auto yield = parse_expanded_personas(responses[i].raw_text, frontier[i]);
            report.rejected += yield.rejections.size();
            report.overflow_dropped += yield.overflow_dropped;
            if (yield.empty_yield()) ++report.empty_yields;
            for (auto& p : yield.personas) {
                if (!known.insert(p.persona_id).second) {
                    ++report.already_known;
                    continue;
                }
                next.push_back(p);
                report.personas.push_back(std::move(p));
            }
        }
        frontier = std::move(next);
    }
    return report;
}

nlohmann::ordered_json to_json(const Persona& persona) {
    nlohmann::ordered_json j;
    j["persona_id"] = persona.persona_id;
    j["countries"] = persona.countries;
    j["languages"] = persona.languages;
    j["description"] = persona.description;
    j["stage"] = to_string(persona.stage);
    j["parent_id"] = persona.parent_id;
    return j;
}

Persona persona_from_json(const nlohmann::json& j) {
    try {
        Persona p;
        p.persona_id = j.at("persona_id").get<std::string>();
        p.countries = j.at("countries").get<std::vector<std::string>>();
        p.languages = j.at("languages").get<std::vector<std::string>>();
        p.description = j.at("description").get<std::string>();
        const auto stage = j.at("stage").get<std::string>();
        if (stage == "from_text") p.stage = PersonaStage::FromText;
        else if (stage == "expanded") p.stage = PersonaStage::Expanded;
        else throw Error(ErrorKind::Schema, "unknown persona stage '" + stage + "'");
        p.parent_id = j.at("parent_id").get<std::string>();
        if (p.countries.empty() || p.languages.empty() || p.description.empty() || p.parent_id.empty()) {
            throw Error(ErrorKind::Schema, "persona " + p.persona_id + " has an empty required field");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("persona record: ") + e.what());
    }
}

void write_personas(const std::filesystem::path& path, const std::vector<Persona>& personas) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(personas.size());
    for (const auto& p : personas) rows.push_back(to_json(p));
    write_file_atomic(path, to_jsonl(rows));
}

std::vector<Persona> read_personas(const std::filesystem::path& path) {
    std::vector<Persona> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            out.push_back(persona_from_json(j));
        } catch (const Error& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace afrisynth
