#include "afrisynth/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <unordered_set>

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

void DatasetManifest::check(std::size_t total_records) const {
    if (per_language_count * languages.size() != total_records) {
        throw Error(ErrorKind::Schema, "manifest expects " + std::to_string(per_language_count) + " x " +
                                           std::to_string(languages.size()) + " records, dataset has " +
                                           std::to_string(total_records));
    }
}

nlohmann::ordered_json DatasetManifest::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["languages"] = languages;
    j["per_language_count"] = per_language_count;
    j["sources"] = sources;
    j["decontamination"] = {{"eval_set_name", eval_set_name}, {"removed_count", decontamination_removed}};
    j["exact_duplicates_removed"] = exact_duplicates_removed;
    j["seed"] = seed;
    j["created_at"] = created_at;
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    try {
        DatasetManifest m;
        m.name = j.at("name").get<std::string>();
        m.languages = j.at("languages").get<std::vector<std::string>>();
        m.per_language_count = j.at("per_language_count").get<std::size_t>();
        m.sources = j.at("sources").get<std::map<std::string, std::size_t>>();
        m.eval_set_name = j.at("decontamination").at("eval_set_name").get<std::string>();
        m.decontamination_removed = j.at("decontamination").at("removed_count").get<std::size_t>();
        m.exact_duplicates_removed = j.value("exact_duplicates_removed", std::size_t{0});
        m.seed = j.at("seed").get<std::uint64_t>();
        m.created_at = j.at("created_at").get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("manifest: ") + e.what());
    }
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path) {
    auto p = dataset_path;
    p += ".manifest.json";
    return p;
}

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
    dataset.manifest.check(dataset.records.size());
    write_records(path, dataset.records);
    write_file_atomic(manifest_path(path), dataset.manifest.to_json().dump(2) + "\n");
}

Dataset read_jsonl(const std::filesystem::path& path) {
    Dataset d;
    d.records = read_records(path);
    const auto mpath = manifest_path(path);
    nlohmann::json mj;
    try {
        mj = nlohmann::json::parse(read_file(mpath));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Schema, mpath.string() + ": " + e.what());
    }
    d.manifest = DatasetManifest::from_json(mj);
    d.manifest.check(d.records.size());
    return d;
}

std::string current_timestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<EvalQuestion> read_eval_set(const std::filesystem::path& path) {
    std::vector<EvalQuestion> out;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        try {
            out.push_back({j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
                           j.value("language", std::string())});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Schema, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

AssemblyResult assemble(std::span<const InstructionRecord> records, const std::vector<std::string>& languages,
                        std::size_t per_language_count, std::span<const std::string> eval_questions,
                        const AssemblyOptions& options) {
    AssemblyResult result;
    auto& manifest = result.dataset.manifest;
    manifest.name = options.name;
    manifest.languages = languages;
    manifest.per_language_count = per_language_count;
    manifest.eval_set_name = options.eval_set_name;
    manifest.seed = options.seed;
    manifest.created_at = options.created_at.empty() ? current_timestamp() : options.created_at;

    const std::unordered_set<std::string> wanted(languages.begin(), languages.end());
    std::vector<const InstructionRecord*> pool;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (!wanted.contains(r.language)) continue;
        if (!seen.insert(r.record_id).second) {
            ++manifest.exact_duplicates_removed;
            continue;
        }
        pool.push_back(&r);
    }

    if (!eval_questions.empty() && !pool.empty()) {
        std::vector<TextItem> items;
        items.reserve(pool.size());
        for (const auto* r : pool) items.push_back({r->record_id, r->prompt});
        auto decon = decontaminate(items, eval_questions, options.dedup);
        const std::unordered_set<std::string> keep(decon.kept_ids.begin(), decon.kept_ids.end());
        std::erase_if(pool, [&](const InstructionRecord* r) { return !keep.contains(r->record_id); });
        manifest.decontamination_removed = decon.removed.size();
        result.decontaminated = std::move(decon.removed);
    }

    std::map<std::string, std::vector<const InstructionRecord*>> by_language;
    for (const auto* r : pool) by_language[r->language].push_back(r);
    for (const auto& lang : languages) {
        const auto have = by_language[lang].size();
        if (have < per_language_count) {
            throw Error(ErrorKind::InsufficientRecords, lang + ": have " + std::to_string(have) + ", need " +
                                                            std::to_string(per_language_count));
        }
    }

    for (std::size_t li = 0; li < languages.size(); ++li) {
        const auto& bucket = by_language[languages[li]];
        auto perm = seeded_permutation(bucket.size(), options.seed + li);
        perm.resize(per_language_count);
        std::sort(perm.begin(), perm.end());
        for (auto idx : perm) {
            result.dataset.records.push_back(*bucket[idx]);
            ++manifest.sources[std::string(to_string(bucket[idx]->source))];
        }
    }
    manifest.check(result.dataset.records.size());
    return result;
}

Quantiles quantiles(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + (values[hi] - values[lo]) * frac;
    };
    return {at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)};
}

nlohmann::ordered_json DatasetStats::to_json() const {
    const auto q = [](const Quantiles& x) {
        return nlohmann::ordered_json{{"p0", x.p0}, {"p25", x.p25}, {"p50", x.p50}, {"p75", x.p75}, {"p100", x.p100}};
    };
    nlohmann::ordered_json j;
    j["total"] = total;
    j["per_language"] = per_language;
    j["per_source"] = per_source;
    j["prompt_words"] = q(prompt_words);
    j["response_words"] = q(response_words);
    return j;
}

DatasetStats stats(std::span<const InstructionRecord> records) {
    DatasetStats s;
    s.total = records.size();
    std::vector<double> pw, rw;
    for (const auto& r : records) {
        ++s.per_language[r.language];
        ++s.per_source[std::string(to_string(r.source))];
        pw.push_back(static_cast<double>(word_count(r.prompt)));
        rw.push_back(static_cast<double>(word_count(r.response)));
    }
    s.prompt_words = quantiles(std::move(pw));
    s.response_words = quantiles(std::move(rw));
    return s;
}

}  // namespace afrisynth
