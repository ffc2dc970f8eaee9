#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/gateway.hpp"

namespace afrisynth {

struct EvalItem {
    std::string item_id;
    std::string language;
    std::string question;
    std::string gold_answer;
    std::string generation;
};

/// JSONL {item_id, language, question, gold_answer, generation}; all non-empty.
std::vector<EvalItem> read_eval_items(const std::filesystem::path& path);

enum class VerdictMethod { Judge, ExactMatch };

std::string_view to_string(VerdictMethod method) noexcept;

struct JudgeVerdict {
    std::string item_id;
    int score = 0;  // 0 or 1
    std::string reasoning;
    std::string raw;
    VerdictMethod method = VerdictMethod::Judge;
    /// False when the judge never produced a marker; score is then 0.
    bool scored = true;

    friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

struct ParsedVerdict {
    int score = 0;
    std::string reasoning;  // text before the winning marker
};

/// The last [[0]] or [[1]] in `raw` decides. nullopt means no marker.
std::optional<ParsedVerdict> parse_verdict(std::string_view raw);

ChatRequest judge_request(const EvalItem& item, const Gateway& gateway, bool reask = false);

/// Asks the judge; on an unparseable reply re-asks once, then returns an
/// unscored verdict. Gateway errors propagate.
JudgeVerdict judge(const EvalItem& item, Gateway& gateway);

/// Score 1 iff the normalized gold number equals some number in the
/// generation (whole-number match, so "8" never matches "18"). Throws
/// GoldNotNumeric when the gold answer is not a single plain number.
JudgeVerdict exact_match(const EvalItem& item);

enum class EvalMethod {
    Judge,       // judge every item; exact match only if the judge call itself fails
    ExactMatch,  // exact match where the gold is numeric, judge otherwise
};

struct EvalRun {
    std::vector<JudgeVerdict> verdicts;  // same order as the items
    std::size_t judge_calls = 0;
    std::size_t gateway_failures = 0;
    std::size_t unscored = 0;
};

/// `gateway` may be null only for ExactMatch; items then needing the judge
/// come back unscored.
EvalRun evaluate_items(std::span<const EvalItem> items, Gateway* gateway, EvalMethod method);

struct EvalReport {
    std::map<std::string, double> per_language_accuracy;
    std::map<std::string, std::size_t> n_items;
    std::map<std::string, std::size_t> n_correct;
    std::map<std::string, std::size_t> n_unscored;
    double overall_avg = 0;                // unweighted mean over languages
    std::optional<double> filtered_avg;    // over languages outside the exclusion set
    double item_weighted_avg = 0;          // correct / items, all languages
    std::set<std::string> excluded;

    nlohmann::ordered_json to_json() const;
};

/// Items without a verdict count as unscored (score 0). Throws EmptyRun.
EvalReport score_run(std::span<const EvalItem> items, std::span<const JudgeVerdict> verdicts,
                     const std::set<std::string>& exclusion_set);

nlohmann::ordered_json to_json(const JudgeVerdict& verdict);
JudgeVerdict verdict_from_json(const nlohmann::json& j);
void write_verdicts(const std::filesystem::path& path, const std::vector<JudgeVerdict>& verdicts);
std::vector<JudgeVerdict> read_verdicts(const std::filesystem::path& path);

}  // namespace afrisynth
