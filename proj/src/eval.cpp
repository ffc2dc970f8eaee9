#include "afrisynth/eval.hpp"

#include <cmath>
#include <regex>
#include <unordered_map>

#include "afrisynth/error.hpp"
#include "afrisynth/numerals.hpp"
#include "afrisynth/prompts.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

std::string_view to_string(VerdictMethod method) noexcept {
    return method == VerdictMethod::Judge ? "judge" : "exact_match";
}

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path) {
    std::vector<EvalItem> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        const auto where = path.string() + ":" + std::to_string(line) + ": ";
        try {
            EvalItem item{j.at("item_id").get<std::string>(), j.at("language").get<std::string>(),
                          j.at("question").get<std::string>(), j.at("gold_answer").get<std::string>(),
                          j.at("generation").get<std::string>()};
            if (item.item_id.empty() || item.language.empty() || item.question.empty() || item.gold_answer.empty() ||
                item.generation.empty()) {
                throw Error(ErrorKind::Schema, where + "eval item fields must be non-empty");
            }
            out.push_back(std::move(item));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Schema, where + e.what());
        }
    });
    return out;
}

std::optional<ParsedVerdict> parse_verdict(std::string_view raw) {
    static const std::regex marker(R"(\[\[\s*([01])\s*\]\])");
    const std::string text(raw);
    std::optional<ParsedVerdict> last;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), marker); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        last = ParsedVerdict{m[1].str() == "1" ? 1 : 0, trim(std::string_view(text).substr(0, m.position(0)))};
    }
    return last;
}

ChatRequest judge_request(const EvalItem& item, const Gateway& gateway, bool reask) {
    auto p = prompts::judge(item.question, item.gold_answer, item.generation);
    std::string id = "judge:" + item.item_id;
    if (reask) {
        p.user += prompts::kJudgeReminder;
        id += ":reask";
    }
    auto req = gateway.make_request(std::move(p.system), std::move(p.user), std::move(id));
    req.temperature = 0.0;
    return req;
}

namespace {

JudgeVerdict verdict_from_reply(const EvalItem& item, const std::string& raw) {
    JudgeVerdict v;
    v.item_id = item.item_id;
    v.raw = raw;
    v.method = VerdictMethod::Judge;
    if (auto parsed = parse_verdict(raw)) {
        v.score = parsed->score;
        v.reasoning = std::move(parsed->reasoning);
    } else {
        v.scored = false;
        v.score = 0;
    }
    return v;
}

}  // namespace

JudgeVerdict judge(const EvalItem& item, Gateway& gateway) {
    auto first = gateway.complete(judge_request(item, gateway));
    auto v = verdict_from_reply(item, first.raw_text);
    if (v.scored) return v;
    auto second = gateway.complete(judge_request(item, gateway, true));
    return verdict_from_reply(item, second.raw_text);
}

JudgeVerdict exact_match(const EvalItem& item) {
    const auto gold = single_number(item.gold_answer);
    if (!gold) throw Error(ErrorKind::GoldNotNumeric, "gold answer '" + item.gold_answer + "' is not a plain number");
    JudgeVerdict v;
    v.item_id = item.item_id;
    v.method = VerdictMethod::ExactMatch;
    v.raw = item.generation;
    for (const auto& tok : scan_numbers(item.generation)) {
        if (tok.normalized == *gold) {
            v.score = 1;
            v.reasoning = "gold " + *gold + " found as '" + tok.raw + "'";
            return v;
        }
    }
    v.reasoning = "gold " + *gold + " not found in generation";
    return v;
}

EvalRun evaluate_items(std::span<const EvalItem> items, Gateway* gateway, EvalMethod method) {
    EvalRun run;
    run.verdicts.resize(items.size());
    std::vector<std::size_t> to_judge;

    for (std::size_t i = 0; i < items.size(); ++i) {
        if (method == EvalMethod::ExactMatch && single_number(items[i].gold_answer)) {
            run.verdicts[i] = exact_match(items[i]);
        } else {
            to_judge.push_back(i);
        }
    }

    const auto mark_unscored = [&](std::size_t i, std::string why) {
        JudgeVerdict v;
        v.item_id = items[i].item_id;
        v.scored = false;
        v.raw = std::move(why);
        run.verdicts[i] = std::move(v);
    };

    if (!gateway) {
        for (auto i : to_judge) mark_unscored(i, "no judge available");
    } else {
        std::vector<std::size_t> reask;
        for (int pass = 0; pass < 2 && !to_judge.empty(); ++pass) {
            std::vector<ChatRequest> reqs;
            reqs.reserve(to_judge.size());
            for (auto i : to_judge) reqs.push_back(judge_request(items[i], *gateway, pass == 1));
            const auto resps = gateway->complete_batch(reqs);
            run.judge_calls += reqs.size();
            reask.clear();
            for (std::size_t k = 0; k < to_judge.size(); ++k) {
                const auto i = to_judge[k];
                if (resps[k].finish_reason == FinishReason::Error) {
                    ++run.gateway_failures;
                    if (single_number(items[i].gold_answer)) run.verdicts[i] = exact_match(items[i]);
                    else mark_unscored(i, resps[k].error);
                    continue;
                }
                run.verdicts[i] = verdict_from_reply(items[i], resps[k].raw_text);
                if (!run.verdicts[i].scored) reask.push_back(i);
            }
            to_judge = reask;
        }
    }
    for (const auto& v : run.verdicts) run.unscored += v.scored ? 0 : 1;
    return run;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["per_language_accuracy"] = per_language_accuracy;
    j["n_items"] = n_items;
    j["n_correct"] = n_correct;
    j["n_unscored"] = n_unscored;
    j["overall_avg"] = overall_avg;
    j["filtered_avg"] = filtered_avg ? nlohmann::ordered_json(*filtered_avg) : nlohmann::ordered_json(nullptr);
    j["item_weighted_avg"] = item_weighted_avg;
    j["excluded_languages"] = excluded;
    return j;
}

EvalReport score_run(std::span<const EvalItem> items, std::span<const JudgeVerdict> verdicts,
                     const std::set<std::string>& exclusion_set) {
    if (items.empty()) throw Error(ErrorKind::EmptyRun, "no items to score");
    std::unordered_map<std::string, const JudgeVerdict*> by_id;
    for (const auto& v : verdicts) by_id[v.item_id] = &v;

    EvalReport report;
    report.excluded = exclusion_set;
    std::size_t correct_total = 0;
    for (const auto& item : items) {
        ++report.n_items[item.language];
        report.n_correct[item.language] += 0;
        report.n_unscored[item.language] += 0;
        const auto it = by_id.find(item.item_id);
        if (it == by_id.end() || !it->second->scored) {
            ++report.n_unscored[item.language];
            continue;
        }
        if (it->second->score == 1) {
            ++report.n_correct[item.language];
            ++correct_total;
        }
    }

    double sum = 0, filtered_sum = 0;
    std::size_t filtered_n = 0;
    for (const auto& [lang, n] : report.n_items) {
        const double acc = static_cast<double>(report.n_correct[lang]) / static_cast<double>(n);
        report.per_language_accuracy[lang] = acc;
        sum += acc;
        if (!exclusion_set.contains(lang)) {
            filtered_sum += acc;
            ++filtered_n;
        }
    }
    report.overall_avg = sum / static_cast<double>(report.n_items.size());
    if (filtered_n > 0) report.filtered_avg = filtered_sum / static_cast<double>(filtered_n);
    report.item_weighted_avg = static_cast<double>(correct_total) / static_cast<double>(items.size());
    return report;
}

nlohmann::ordered_json to_json(const JudgeVerdict& v) {
    nlohmann::ordered_json j;
    j["item_id"] = v.item_id;
    j["score"] = v.score;
    j["scored"] = v.scored;
    j["method"] = to_string(v.method);
    j["reasoning"] = v.reasoning;
    j["raw"] = v.raw;
    return j;
}

JudgeVerdict verdict_from_json(const nlohmann::json& j) {
    try {
        JudgeVerdict v;
        v.item_id = j.at("item_id").get<std::string>();
        v.score = j.at("score").get<int>();
        if (v.score != 0 && v.score != 1) throw Error(ErrorKind::Schema, "score must be 0 or 1");
        v.scored = j.at("scored").get<bool>();
        const auto m = j.at("method").get<std::string>();
        if (m == "judge") v.method = VerdictMethod::Judge;
        else if (m == "exact_match") v.method = VerdictMethod::ExactMatch;
        else throw Error(ErrorKind::Schema, "unknown verdict method '" + m + "'");
        v.reasoning = j.at("reasoning").get<std::string>();
        v.raw = j.at("raw").get<std::string>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("verdict: ") + e.what());
    }
}

void write_verdicts(const std::filesystem::path& path, const std::vector<JudgeVerdict>& verdicts) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(verdicts.size());
    for (const auto& v : verdicts) rows.push_back(to_json(v));
    write_file_atomic(path, to_jsonl(rows));
}

std::vector<JudgeVerdict> read_verdicts(const std::filesystem::path& path) {
    std::vector<JudgeVerdict> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            out.push_back(verdict_from_json(j));
        } catch (const Error& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

}  // namespace afrisynth
