#include "afrisynth/translate.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "afrisynth/error.hpp"
#include "afrisynth/languages.hpp"
#include "afrisynth/numerals.hpp"
#include "afrisynth/prompts.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::string_view to_string(SourceDataset dataset) noexcept {
    return dataset == SourceDataset::Bigmath ? "bigmath" : "openmath";
}

std::vector<SourcePair> read_source_pairs(const std::filesystem::path& path) {
    std::vector<SourcePair> out;
    std::unordered_set<std::string> ids;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        const auto where = path.string() + ":" + std::to_string(line) + ": ";
        try {
            SourcePair p;
            p.pair_id = j.at("pair_id").get<std::string>();
            p.problem = j.at("problem").get<std::string>();
            p.answer = j.at("answer").get<std::string>();
            const auto ds = ascii_lower(j.at("dataset").get<std::string>());
            if (ds == "bigmath") p.dataset = SourceDataset::Bigmath;
            else if (ds == "openmath") p.dataset = SourceDataset::Openmath;
            else throw Error(ErrorKind::Schema, "unknown dataset '" + ds + "'");
            if (p.pair_id.empty() || trim(p.problem).empty() || trim(p.answer).empty()) {
                throw Error(ErrorKind::Schema, "pair_id, problem and answer must be non-empty");
            }
            if (!ids.insert(p.pair_id).second) throw Error(ErrorKind::Schema, "duplicate pair_id " + p.pair_id);
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Schema, where + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::Schema, where + e.what());
        }
    });
    return out;
}

std::vector<TranslationAssignment> sample_assignments(std::span<const SourcePair> pairs,
                                                      const LanguageQuota& per_language, std::uint64_t seed) {
    std::size_t total = 0;
    for (const auto& [lang, n] : per_language) total += n;
    if (pairs.size() < total) {
        throw Error(ErrorKind::InsufficientPairs,
                    "need " + std::to_string(total) + " pairs, have " + std::to_string(pairs.size()));
    }
    const auto perm = seeded_permutation(pairs.size(), seed);
    std::vector<TranslationAssignment> out;
    out.reserve(total);
    std::size_t next = 0;
    for (const auto& [lang, n] : per_language) {
        for (std::size_t k = 0; k < n; ++k) out.push_back({pairs[perm[next++]].pair_id, lang});
    }
    return out;
}

namespace {

std::vector<std::string> missing_runs(std::string_view source, std::string_view target) {
    const auto want = digit_sequences(source);
    const auto have_vec = digit_sequences(target);
    const std::set<std::string> have(have_vec.begin(), have_vec.end());
    std::vector<std::string> missing;
    std::set<std::string> reported;
    for (const auto& run : want) {
        if (!have.contains(run) && reported.insert(run).second) missing.push_back(run);
    }
    return missing;
}

}  // namespace

std::string TranslationCheck::describe() const {
    std::string s;
    const auto join = [](const std::vector<std::string>& v) {
        std::string out;
        for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
        return out;
    };
    if (!missing_in_problem.empty()) s += "problem missing [" + join(missing_in_problem) + "]";
    if (!missing_in_response.empty()) s += std::string(s.empty() ? "" : "; ") + "response missing [" + join(missing_in_response) + "]";
    return s;
}

TranslationCheck verify_translation(const SourcePair& source, std::string_view translated_problem,
                                    std::string_view translated_response) {
    return {missing_runs(source.problem, translated_problem), missing_runs(source.answer, translated_response)};
}

ChatRequest translation_request(const SourcePair& pair, const std::string& language, const Gateway& gateway) {
    auto p = prompts::translation(pair.problem, pair.answer, language_name(language));
    return gateway.make_request(std::move(p.system), std::move(p.user), "translate:" + language + ":" + pair.pair_id);
}

InstructionRecord parse_translation_reply(std::string_view raw, const SourcePair& pair, const std::string& language) {
    nlohmann::json value;
    try {
        value = extract_json(raw);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseFailure, e.what());
    }
    if (!value.is_object() || !value.contains("problem_translation") || !value["problem_translation"].is_string() ||
        !value.contains("step_by_step_response") || !value["step_by_step_response"].is_string()) {
        throw Error(ErrorKind::ParseFailure, "expected {\"problem_translation\": str, \"step_by_step_response\": str}");
    }
    InstructionRecord r;
    r.language = language;
    r.prompt = trim(value["problem_translation"].get<std::string>());
    r.response = trim(value["step_by_step_response"].get<std::string>());
    if (r.prompt.empty() || r.response.empty()) throw Error(ErrorKind::ParseFailure, "empty translation field");

    const auto check = verify_translation(pair, r.prompt, r.response);
    if (!check.passed()) throw Error(ErrorKind::NumberPreservation, check.describe());

    try {
        r.final_answer = extract_final_answer(r.response);
    } catch (const Error& e) {
        throw Error(ErrorKind::AnswerExtraction, e.what());
    }
    r.source = pair.dataset == SourceDataset::Bigmath ? RecordSource::TranslatedBigmath
                                                      : RecordSource::TranslatedOpenmath;
    r.provenance = pair.pair_id;
    r.arithmetic_lines = count_arithmetic_lines(r.response);
    r.record_id = record_id_for(r.language, r.prompt, r.response);
    return r;
}

InstructionRecord translate_pair(const SourcePair& pair, const std::string& language, Gateway& gateway) {
    const auto response = gateway.complete(translation_request(pair, language, gateway));
    return parse_translation_reply(response.raw_text, pair, language);
}

nlohmann::ordered_json TranslationResult::report() const {
    nlohmann::ordered_json j;
    j["records"] = records.size();
    j["pairs_sent"] = assignments.size();
    j["quota_met"] = quota_met();
    j["unmet"] = unmet;
    auto fails = nlohmann::ordered_json::array();
    for (const auto& f : failures) fails.push_back({{"pair_id", f.pair_id}, {"language", f.language}, {"reason", f.reason}});
    j["failures"] = std::move(fails);
    return j;
}

TranslationResult translate_batch(std::span<const SourcePair> pairs, const LanguageQuota& per_language,
                                  std::uint64_t seed, Gateway& gateway) {
    TranslationResult result;
    std::size_t total = 0;
    for (const auto& [lang, n] : per_language) total += n;
    if (pairs.size() < total) {
        throw Error(ErrorKind::InsufficientPairs,
                    "need " + std::to_string(total) + " pairs, have " + std::to_string(pairs.size()));
    }

    std::unordered_map<std::string, const SourcePair*> by_id;
    for (const auto& p : pairs) by_id.emplace(p.pair_id, &p);

    // The same permutation sample_assignments uses; its tail is the reserve.
    const auto perm = seeded_permutation(pairs.size(), seed);
    std::size_t next_unused = total;
    std::vector<TranslationAssignment> pending = sample_assignments(pairs, per_language, seed);
    std::map<std::string, std::size_t> missing;
    std::map<std::string, std::vector<InstructionRecord>> by_language;
    std::unordered_set<std::string> emitted;

    while (!pending.empty()) {
        std::vector<ChatRequest> requests;
        requests.reserve(pending.size());
        for (const auto& a : pending) {
            requests.push_back(translation_request(*by_id.at(a.pair_id), a.target_language, gateway));
            result.assignments.push_back(a);
        }
        const auto responses = gateway.complete_batch(requests);

        std::vector<TranslationAssignment> retry;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const auto& a = pending[i];
            std::string failure;
            if (responses[i].finish_reason == FinishReason::Error) {
                failure = responses[i].error;
            } else {
                try {
                    auto rec = parse_translation_reply(responses[i].raw_text, *by_id.at(a.pair_id), a.target_language);
                    if (emitted.insert(rec.record_id).second) {
                        by_language[a.target_language].push_back(std::move(rec));
                    } else {
                        failure = "duplicate record";
                    }
                } catch (const Error& e) {
                    failure = e.what();
                }
            }
            if (failure.empty()) continue;
            result.failures.push_back({a.pair_id, a.target_language, failure});
            if (next_unused < perm.size()) {
                retry.push_back({pairs[perm[next_unused++]].pair_id, a.target_language});
            } else {
                ++missing[a.target_language];
            }
        }
        pending = std::move(retry);
    }

    for (const auto& [lang, n] : per_language) {
        auto& recs = by_language[lang];
        for (auto& r : recs) result.records.push_back(std::move(r));
    }
    result.unmet = std::move(missing);
    return result;
}

}  // namespace afrisynth
