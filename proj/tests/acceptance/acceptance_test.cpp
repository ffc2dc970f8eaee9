// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped), so ctest goes red on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "afrisynth/corpus.hpp"
#include "afrisynth/dataset.hpp"
#include "afrisynth/error.hpp"
#include "afrisynth/eval.hpp"
#include "afrisynth/minhash.hpp"
#include "afrisynth/pipeline.hpp"
#include "afrisynth/util.hpp"
#include "test_support.hpp"

using namespace afrisynth;
namespace ts = testing_support;
namespace fs = std::filesystem;
using Wall = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Wall::time_point t0) {
    return std::chrono::duration<double>(Wall::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

// Sorted 64-bit shingle hashes: a fast exact-Jaccard oracle for larger corpora.
std::vector<std::uint64_t> hashed_shingles(const std::string& text) {
    std::vector<std::string> w;
    std::istringstream in(text);
    for (std::string s; in >> s;) w.push_back(s);
    std::vector<std::uint64_t> out;
    std::hash<std::string> h;
    for (std::size_t i = 0; i + 3 <= w.size(); ++i) out.push_back(h(w[i] + ' ' + w[i + 1] + ' ' + w[i + 2]));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double jaccard_sorted(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++inter; ++i; ++j; }
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// --- 1 ---------------------------------------------------------------------
Outcome minhash_fidelity() {
    const auto t0 = Wall::now();
    std::mt19937_64 rng(101);
    int within = 0;
    double worst = 0;
    for (int p = 0; p < 100; ++p) {
        // union of 200 elements split into shared / only-a / only-b
        const int shared = static_cast<int>(rng() % 201);
        const int only_a = (200 - shared) / 2;
        ShingleSet a, b;
        for (int i = 0; i < 200; ++i) {
            const std::string e = "p" + std::to_string(p) + "e" + std::to_string(i);
            if (i < shared) { a.insert(e); b.insert(e); }
            else if (i < shared + only_a) a.insert(e);
            else b.insert(e);
        }
        if (a.empty()) a.insert("pad-a");
        if (b.empty()) b.insert("pad-b");
        const double truth = ts::exact_jaccard(a, b);
        const std::uint64_t seed = rng();
        const double est = estimate_jaccard(minhash(a, 256, seed), minhash(b, 256, seed));
        worst = std::max(worst, std::abs(est - truth));
        within += std::abs(est - truth) <= 0.08;
    }
    const double secs = seconds_since(t0);
    return {within >= 95 && secs < 10,
            std::to_string(within) + "/100 within 0.08 (worst " + fmt(worst) + "), " + fmt(secs, 2) + " s"};
}

// --- 2 ---------------------------------------------------------------------
Outcome lsh_recall_precision() {
    std::mt19937_64 rng(202);
    std::vector<TextItem> docs;
    std::set<std::string> planted_copies, controls;
    // 900 controls, then 50 originals each followed later by a near copy
    for (int i = 0; i < 900; ++i) {
        docs.push_back({"c" + std::to_string(i), ts::random_words(rng, 102)});
        controls.insert(docs.back().id);
    }
    std::vector<TextItem> originals;
    for (int i = 0; i < 50; ++i) originals.push_back({"o" + std::to_string(i), ts::random_words(rng, 102)});
    for (auto& o : originals) docs.push_back(o);
    double min_planted = 1;
    for (int i = 0; i < 50; ++i) {
        const std::size_t j = 1 + static_cast<std::size_t>(i % 8);  // 100 shingles, J = (100-j)/(100+j) >= 0.85
        docs.push_back({"d" + std::to_string(i), ts::replace_tail(originals[i].text, j, rng)});
        planted_copies.insert(docs.back().id);
        min_planted = std::min(min_planted,
                               jaccard_sorted(hashed_shingles(originals[i].text), hashed_shingles(docs.back().text)));
    }

    // oracle over the control set: every pair must be below 0.3
    std::vector<std::vector<std::uint64_t>> hs;
    for (int i = 0; i < 900; ++i) hs.push_back(hashed_shingles(docs[i].text));
    double max_control = 0;
    for (std::size_t a = 0; a < hs.size(); ++a)
        for (std::size_t b = a + 1; b < hs.size(); ++b) max_control = std::max(max_control, jaccard_sorted(hs[a], hs[b]));

    const auto t0 = Wall::now();
    DedupParams params;
    params.seed = 7;
    const auto result = dedup(docs, params);
    const double secs = seconds_since(t0);

    std::size_t planted_dropped = 0, control_dropped = 0, original_dropped = 0;
    for (const auto& d : result.dropped) {
        planted_dropped += planted_copies.count(d.dropped_id);
        control_dropped += controls.count(d.dropped_id);
        original_dropped += d.dropped_id[0] == 'o';
    }
    const bool fixture_ok = min_planted >= 0.85 && max_control < 0.3 && docs.size() == 1000;
    return {fixture_ok && planted_dropped >= 48 && control_dropped == 0 && original_dropped == 0 && secs < 30,
            std::to_string(planted_dropped) + "/50 planted dropped, " + std::to_string(control_dropped) +
                " control drops (min planted J " + fmt(min_planted) + ", max control J " + fmt(max_control) + "), " +
                fmt(secs, 2) + " s"};
}

// --- 3 ---------------------------------------------------------------------
Outcome decontamination() {
    std::size_t exact_total = 0, exact_removed = 0, para_total = 0, para_removed = 0, clean_removed = 0;
    bool eval_untouched = true, fixture_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(3000 + trial);
        std::vector<std::string> eval;
        for (int i = 0; i < 10; ++i) eval.push_back(ts::random_words(rng, 59));
        const auto eval_before = eval;

        std::vector<TextItem> train;
        std::set<std::string> exact_ids, para_ids;
        for (int i = 0; i < 40; ++i) train.push_back({"t" + std::to_string(i), ts::random_words(rng, 59)});
        for (int i = 0; i < 3; ++i) {
            train.push_back({"x" + std::to_string(i), eval[i]});
            exact_ids.insert(train.back().id);
        }
        for (int i = 3; i < 6; ++i) {
            // 57 shingles, 3 swapped: J = 54 / 60 = 0.9
            train.push_back({"p" + std::to_string(i), ts::replace_tail(eval[i], 3, rng)});
            para_ids.insert(train.back().id);
            const double j = jaccard_sorted(hashed_shingles(eval[i]), hashed_shingles(train.back().text));
            fixture_ok = fixture_ok && std::abs(j - 0.9) < 1e-9;
        }
        std::shuffle(train.begin(), train.end(), rng);

        DedupParams params;
        params.seed = static_cast<std::uint64_t>(trial);
        const auto r = decontaminate(train, eval, params);
        for (const auto& d : r.removed) {
            exact_removed += exact_ids.count(d.dropped_id);
            para_removed += para_ids.count(d.dropped_id);
            clean_removed += d.dropped_id[0] == 't';
        }
        exact_total += exact_ids.size();
        para_total += para_ids.size();
        eval_untouched = eval_untouched && eval == eval_before;
    }
    const double para_rate = static_cast<double>(para_removed) / static_cast<double>(para_total);
    return {fixture_ok && exact_removed == exact_total && para_rate >= 0.9 && eval_untouched,
            "exact " + std::to_string(exact_removed) + "/" + std::to_string(exact_total) + ", paraphrase " +
                std::to_string(para_removed) + "/" + std::to_string(para_total) + ", clean removed " +
                std::to_string(clean_removed) + ", eval " + (eval_untouched ? "untouched" : "MODIFIED")};
}

// --- 4 ---------------------------------------------------------------------
PipelineConfig demo_config(const fs::path& work) {
    const fs::path demo = AFRISYNTH_DEMO_DIR;
    std::ifstream in(demo / "config.json");
    auto j = nlohmann::json::parse(in);
    j["work_dir"] = work.string();
    return PipelineConfig::from_json(j, demo);
}

Outcome end_to_end() {
    const auto t0 = Wall::now();
    ts::TempDir a, b;
    std::string problems;
    for (const auto* dir : {&a, &b}) {
        const auto config = demo_config(dir->path());
        for (Stage s : all_stages()) {
            const auto out = run_stage(s, config);
            if (out.exit_code != kExitOk) return {false, std::string(to_string(s)) + ": " + out.summary};
        }
    }
    const double secs = seconds_since(t0);

    std::map<std::string, std::size_t> per_lang;
    std::size_t bad_schema = 0, missing_answer = 0;
    for_each_jsonl(a / "dataset.jsonl", [&](std::size_t, const nlohmann::json& j) {
        try {
            const auto r = record_from_json(j);
            ++per_lang[r.language];
            if (r.record_id != record_id_for(r.language, r.prompt, r.response)) ++bad_schema;
            if (r.final_answer.empty() || r.response.find(r.final_answer) == std::string::npos) ++missing_answer;
        } catch (const Error&) {
            ++bad_schema;
        }
    });
    bool manifest_ok = true;
    try {
        read_jsonl(a / "dataset.jsonl");
    } catch (const Error&) {
        manifest_ok = false;
    }
    const auto config = demo_config(a.path());
    std::set<std::size_t> counts;
    for (const auto& [lang, n] : per_lang) counts.insert(n);
    const bool equal = per_lang.size() == config.target_languages.size() && counts.size() == 1;
    for (const auto& lang : config.target_languages)
        if (!per_lang.count(lang)) problems += " missing " + lang;

    std::set<std::string> pair_ids;
    std::size_t repeated = 0;
    for_each_jsonl(a / "translation_assignments.jsonl", [&](std::size_t, const nlohmann::json& j) {
        repeated += !pair_ids.insert(j.at("pair_id").get<std::string>()).second;
    });
    std::set<std::string> translated_sources;
    for (const auto& r : read_records(a / "translated.jsonl"))
        repeated += !translated_sources.insert(r.provenance).second;

    std::size_t differing = 0;
    for (const auto& entry : fs::directory_iterator(a.path())) {
        const auto other = b / entry.path().filename().string();
        if (!fs::exists(other) || ts::slurp(entry.path()) != ts::slurp(other)) ++differing;
    }
    const bool pass = equal && bad_schema == 0 && manifest_ok && missing_answer == 0 && repeated == 0 &&
                      differing == 0 && secs < 60;
    return {pass, std::to_string(per_lang.size()) + " languages x " +
                      (counts.size() == 1 ? std::to_string(*counts.begin()) : std::string("unequal")) + ", " +
                      std::to_string(bad_schema) + " schema errors, " + std::to_string(missing_answer) +
                      " answers missing, " + std::to_string(repeated) + " repeated pair_ids, " +
                      std::to_string(differing) + " files differ on rerun, " + fmt(secs, 2) + " s (2 runs)" +
                      problems};
}

// --- 5 ---------------------------------------------------------------------
Outcome verdict_parsing() {
    std::size_t n = 0, agree = 0;
    for_each_jsonl(fs::path(AFRISYNTH_TEST_DATA) / "verdict_labels.jsonl", [&](std::size_t, const nlohmann::json& j) {
        ++n;
        const auto got = parse_verdict(j.at("raw").get<std::string>());
        const auto& label = j.at("label");
        if (label.is_null()) agree += !got.has_value();
        else agree += got.has_value() && got->score == label.get<int>();
    });
    return {n >= 20 && agree == n, std::to_string(agree) + "/" + std::to_string(n) + " agree with hand labels"};
}

// --- 6 ---------------------------------------------------------------------
Outcome exact_match_fixture() {
    std::size_t n = 0, agree = 0;
    bool has_trap = false, has_worked = false;
    for_each_jsonl(fs::path(AFRISYNTH_TEST_DATA) / "exact_match_items.jsonl", [&](std::size_t, const nlohmann::json& j) {
        ++n;
        auto str = [&](const char* k) { return j.at(k).get<std::string>(); };
        EvalItem item{str("item_id"), str("language"), str("question"), str("gold_answer"), str("generation")};
        has_trap = has_trap || (item.gold_answer == "8" && item.generation.find("18") != std::string::npos);
        has_worked = has_worked || item.generation.find("20 - 12 = 8") != std::string::npos;
        const auto& label = j.at("label");
        try {
            const auto v = exact_match(item);
            agree += label.is_number() && v.score == label.get<int>();
        } catch (const Error& e) {
            agree += label.is_string() && e.kind() == ErrorKind::GoldNotNumeric;
        }
    });
    return {n >= 20 && agree == n && has_trap && has_worked,
            std::to_string(agree) + "/" + std::to_string(n) + " match hand verdicts"};
}

// --- 7 ---------------------------------------------------------------------
Outcome gateway_discipline() {
    GatewayConfig config;
    config.max_concurrency = 4;
    config.retry.max_retries = 3;
    ts::MockRig rig(config);
    rig.backend->set_latency(std::chrono::milliseconds(3));

    auto scripted = [](std::string prefix, std::vector<MockReply> replies) {
        MockRule r;
        r.name = prefix;
        r.request_id_prefix = std::move(prefix);
        r.replies = std::move(replies);
        return r;
    };
    rig.backend->add_rule(scripted("flaky:", {MockReply::fail(429), MockReply::fail(503), MockReply::ok("ok")}));
    rig.backend->add_rule(scripted("dead:", {MockReply::fail(500)}));
    rig.backend->add_rule(scripted("auth:", {MockReply::fail(401)}));
    rig.backend->add_rule(scripted("once:", {MockReply::fail(502), MockReply::ok("ok")}));

    // expected attempts per scripted transcript
    std::map<std::string, std::size_t> expected;
    std::vector<ChatRequest> reqs;
    const std::vector<std::pair<std::string, std::size_t>> kinds = {
        {"clean:", 1}, {"flaky:", 3}, {"dead:", 4}, {"auth:", 1}, {"once:", 2}};
    for (int i = 0; i < 60; ++i) {
        const auto& [prefix, attempts] = kinds[i % kinds.size()];
        const auto id = prefix + std::to_string(i);
        reqs.push_back(rig.gw().make_request("sys", "user " + std::to_string(i), id));
        expected[id] = attempts;
    }
    const auto responses = rig.gw().complete_batch(reqs, 4);

    std::size_t mismatched = 0;
    for (const auto& [id, n] : expected) mismatched += rig.backend->calls_for(id) != n;
    std::size_t bad_status = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const bool should_fail = reqs[i].request_id.rfind("dead:", 0) == 0 || reqs[i].request_id.rfind("auth:", 0) == 0;
        bad_status += (responses[i].finish_reason == FinishReason::Error) != should_fail;
        bad_status += static_cast<std::size_t>(responses[i].attempts) != expected[reqs[i].request_id];
    }
    const auto peak_mock = rig.backend->max_in_flight();
    const auto peak_gw = rig.gw().max_in_flight_observed();
    return {peak_mock <= 4 && peak_gw <= 4 && mismatched == 0 && bad_status == 0,
            "peak in-flight " + std::to_string(peak_mock) + " (gateway " + std::to_string(peak_gw) + ") <= 4, " +
                std::to_string(mismatched) + " attempt-count mismatches over " + std::to_string(expected.size()) +
                " requests, " + std::to_string(rig.backend->transcript().size()) + " calls"};
}

// --- 8 ---------------------------------------------------------------------
Outcome truncation_law() {
    std::mt19937_64 rng(808);
    const std::vector<std::string> seps = {" ", "  ", "\t", "\n", " \r\n ", "\f", "\v"};
    const std::vector<std::string> glyphs = {"a", "b", "ọ", "é", "ش", "7", ",", "-", "ŋ"};
    int ok = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = rng() % 450;
        std::string text = rng() % 2 ? seps[rng() % seps.size()] : "";
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t len = 1 + rng() % 6;
            for (std::size_t k = 0; k < len; ++k) text += glyphs[rng() % glyphs.size()];
            text += seps[rng() % seps.size()];
        }
        // oracle: istream word extraction
        auto count = [](const std::string& s) {
            std::istringstream in(s);
            std::size_t c = 0;
            for (std::string w; in >> w;) ++c;
            return c;
        };
        ok += count(truncate_words(text, 200)) == std::min<std::size_t>(count(text), 200);
    }
    return {ok == 1000, std::to_string(ok) + "/1000 texts obey the law"};
}

// --- 9 ---------------------------------------------------------------------
Outcome report_arithmetic() {
    std::mt19937_64 rng(909);
    const std::vector<std::string> langs = {"eng", "fra", "yor", "swa"};
    const std::set<std::string> excluded = {"eng", "fra"};
    std::size_t failures = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EvalItem> items;
        std::vector<JudgeVerdict> verdicts;
        for (const auto& lang : langs) {
            const std::size_t n = 1 + rng() % 12;
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = lang + "-" + std::to_string(i);
                items.push_back({id, lang, "q", "8", "g"});
                const auto roll = rng() % 10;
                if (roll == 0) continue;  // no verdict at all
                JudgeVerdict v;
                v.item_id = id;
                v.scored = roll != 1;
                v.score = v.scored ? static_cast<int>(rng() % 2) : 0;
                verdicts.push_back(v);
            }
        }
        std::shuffle(verdicts.begin(), verdicts.end(), rng);

        // brute-force recount
        std::map<std::string, double> correct, total, unscored;
        for (const auto& it : items) {
            total[it.language] += 1;
            const JudgeVerdict* found = nullptr;
            for (const auto& v : verdicts)
                if (v.item_id == it.item_id) found = &v;
            if (!found || !found->scored) unscored[it.language] += 1;
            else correct[it.language] += found->score;
        }
        double sum = 0, fsum = 0, nf = 0, all_correct = 0, all_items = 0;
        std::map<std::string, double> acc;
        for (const auto& lang : langs) {
            acc[lang] = correct[lang] / total[lang];
            sum += acc[lang];
            all_correct += correct[lang];
            all_items += total[lang];
            if (!excluded.count(lang)) { fsum += acc[lang]; nf += 1; }
        }

        const auto report = score_run(items, verdicts, excluded);
        auto close = [](double x, double y) { return std::abs(x - y) < 1e-12; };
        bool ok = close(report.overall_avg, sum / 4) && report.filtered_avg.has_value() &&
                  close(*report.filtered_avg, fsum / nf) && close(report.item_weighted_avg, all_correct / all_items);
        for (const auto& lang : langs) {
            ok = ok && close(report.per_language_accuracy.at(lang), acc[lang]) &&
                 report.n_items.at(lang) == static_cast<std::size_t>(total[lang]) &&
                 report.n_correct.at(lang) == static_cast<std::size_t>(correct[lang]) &&
                 report.n_unscored.at(lang) == static_cast<std::size_t>(unscored[lang]);
        }
        failures += !ok;
    }
    return {failures == 0, std::to_string(50 - failures) + "/50 randomized 4-language runs match the recount"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"minhash fidelity", minhash_fidelity},
        {"lsh recall/precision", lsh_recall_precision},
        {"decontamination", decontamination},
        {"end-to-end mock run", end_to_end},
        {"verdict parsing", verdict_parsing},
        {"exact-match correctness", exact_match_fixture},
        {"gateway discipline", gateway_discipline},
        {"truncation law", truncation_law},
        {"report arithmetic", report_arithmetic},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << index << ". " << name << ": " << o.detail << std::endl;
    }
    return std::min(failed, 100);
}
