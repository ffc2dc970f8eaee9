#include "afrisynth/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "afrisynth/dataset.hpp"
#include "afrisynth/error.hpp"
#include "afrisynth/http_backend.hpp"
#include "afrisynth/languages.hpp"
#include "afrisynth/mock_backend.hpp"
#include "afrisynth/persona.hpp"
#include "afrisynth/translate.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {

namespace fs = std::filesystem;

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::Ingest: return "ingest";
        case Stage::Personas: return "personas";
        case Stage::Expand: return "expand";
        case Stage::Dedup: return "dedup";
        case Stage::Synthesize: return "synthesize";
        case Stage::Translate: return "translate";
        case Stage::Assemble: return "assemble";
        case Stage::Evaluate: return "evaluate";
        case Stage::Report: return "report";
    }
    return "?";
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::Ingest,     Stage::Personas,  Stage::Expand,
                                           Stage::Dedup,      Stage::Synthesize, Stage::Translate,
                                           Stage::Assemble,   Stage::Evaluate,  Stage::Report};
    return stages;
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
    for (auto s : all_stages()) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::vector<Stage> upstream_stages(Stage stage) {
    switch (stage) {
        case Stage::Ingest: return {};
        case Stage::Personas: return {Stage::Ingest};
        case Stage::Expand: return {Stage::Personas};
        case Stage::Dedup: return {Stage::Personas, Stage::Expand};
        case Stage::Synthesize: return {Stage::Dedup};
        case Stage::Translate: return {};
        case Stage::Assemble: return {Stage::Synthesize, Stage::Translate};
        case Stage::Evaluate: return {Stage::Assemble};
        case Stage::Report: return {Stage::Evaluate};
    }
    return {};
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

LanguageQuota quota_from(const nlohmann::json& j, const std::vector<std::string>& languages, const char* what) {
    LanguageQuota q;
    if (j.is_null()) {
        for (const auto& l : languages) q.emplace_back(l, 0);
    } else if (j.is_number_unsigned()) {
        for (const auto& l : languages) q.emplace_back(l, j.get<std::size_t>());
    } else if (j.is_object()) {
        for (const auto& l : languages) q.emplace_back(l, j.value(l, std::size_t{0}));
        for (const auto& [k, v] : j.items()) {
            if (std::find(languages.begin(), languages.end(), k) == languages.end()) {
                throw Error(ErrorKind::Config, std::string(what) + ": language '" + k + "' is not a target language");
            }
        }
    } else {
        throw Error(ErrorKind::Config, std::string(what) + " must be a non-negative integer or a language map");
    }
    return q;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    PipelineConfig c;
    try {
        const auto gw = j.value("gateway", nlohmann::json::object());
        c.gateway = GatewayConfig::from_json(gw);
        if (gw.contains("mock_fixture")) c.mock_fixture = resolve(base_dir, gw["mock_fixture"].get<std::string>());

        c.target_languages = j.value("target_languages", default_target_languages());
        if (c.target_languages.empty()) throw Error(ErrorKind::Config, "target_languages must be non-empty");
        std::set<std::string> uniq(c.target_languages.begin(), c.target_languages.end());
        if (uniq.size() != c.target_languages.size()) throw Error(ErrorKind::Config, "duplicate target language");

        c.seed = j.value("seed", std::uint64_t{0});
        c.work_dir = resolve(base_dir, j.value("work_dir", std::string("work")));

        const auto in = j.value("inputs", nlohmann::json::object());
        c.articles = resolve(base_dir, in.value("articles", std::string("articles.jsonl")));
        const auto fmt = in.value("articles_format", std::string("jsonl"));
        if (fmt == "jsonl") c.articles_format = ArticleFormat::Jsonl;
        else if (fmt == "plain_dir") c.articles_format = ArticleFormat::PlainDir;
        else throw Error(ErrorKind::Config, "inputs.articles_format must be jsonl or plain_dir");
        c.exemplars = resolve(base_dir, in.value("exemplars", std::string("exemplars.jsonl")));
        c.source_pairs = resolve(base_dir, in.value("source_pairs", std::string("source_pairs.jsonl")));
        if (in.contains("eval_set") && !in["eval_set"].is_null()) {
            c.eval_set = resolve(base_dir, in["eval_set"].get<std::string>());
        }
        c.generations = resolve(base_dir, in.value("generations", std::string("generations.jsonl")));

        const auto ingest = j.value("ingest", nlohmann::json::object());
        c.word_limit = ingest.value("word_limit", c.word_limit);
        if (c.word_limit == 0) throw Error(ErrorKind::Config, "ingest.word_limit must be >= 1");

        const auto personas = j.value("personas", nlohmann::json::object());
        c.expansion_depth = personas.value("expansion_depth", c.expansion_depth);
        if (c.expansion_depth < 0) throw Error(ErrorKind::Config, "personas.expansion_depth must be >= 0");

        auto dedup = j.value("dedup", nlohmann::json::object());
        if (!dedup.contains("seed")) dedup["seed"] = c.seed;
        c.dedup = DedupParams::from_json(dedup);

        const auto synth = j.value("synthesize", nlohmann::json::object());
        c.synth_quota = quota_from(synth.value("per_language", nlohmann::json()), c.target_languages,
                                   "synthesize.per_language");
        c.synth_extra_attempts = synth.value("extra_attempts", c.synth_extra_attempts);
        const auto mode = synth.value("mode", std::string("math"));
        if (mode == "math") c.synth_mode = TaskMode::Math;
        else if (mode == "generic") c.synth_mode = TaskMode::Generic;
        else throw Error(ErrorKind::Config, "synthesize.mode must be math or generic");

        const auto tr = j.value("translate", nlohmann::json::object());
        c.translate_quota = quota_from(tr.value("per_language", nlohmann::json()), c.target_languages,
                                       "translate.per_language");

        const auto as = j.value("assemble", nlohmann::json::object());
        c.dataset_name = as.value("name", c.dataset_name);
        c.per_language_count = as.value("per_language_count", c.per_language_count);
        c.eval_set_name = as.value("eval_set_name", c.eval_set ? c.eval_set->stem().string() : std::string());
        c.created_at = as.value("created_at", std::string());

        const auto ev = j.value("evaluate", nlohmann::json::object());
        const auto method = ev.value("method", std::string("judge"));
        if (method == "judge") c.eval_method = EvalMethod::Judge;
        else if (method == "exact_match") c.eval_method = EvalMethod::ExactMatch;
        else throw Error(ErrorKind::Config, "evaluate.method must be judge or exact_match");
        if (ev.contains("exclude_languages")) {
            c.exclude_languages = ev["exclude_languages"].get<std::set<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    return c;
}

PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    if (seed_override) {
        j["seed"] = *seed_override;
        if (j.contains("dedup") && j["dedup"].is_object()) j["dedup"].erase("seed");
    }
    return PipelineConfig::from_json(j, fs::absolute(path).parent_path());
}

namespace {

struct Paths {
    fs::path articles, personas_text, personas_expanded, personas, persona_drops, synthetic, synth_report,
        translated, assignments, translate_report, dataset, manifest, decon_drops, verdicts, report;

    explicit Paths(const fs::path& w)
        : articles(w / "articles.jsonl"), personas_text(w / "personas_from_text.jsonl"),
          personas_expanded(w / "personas_expanded.jsonl"), personas(w / "personas.jsonl"),
          persona_drops(w / "persona_drops.jsonl"), synthetic(w / "synthetic.jsonl"),
          synth_report(w / "synthesize_report.json"), translated(w / "translated.jsonl"),
          assignments(w / "translation_assignments.jsonl"), translate_report(w / "translate_report.json"),
          dataset(w / "dataset.jsonl"), manifest(manifest_path(w / "dataset.jsonl")),
          decon_drops(w / "decontamination_drops.jsonl"), verdicts(w / "verdicts.jsonl"),
          report(w / "report.json") {}
};

}  // namespace

StageIO stage_io(Stage stage, const PipelineConfig& c) {
    const Paths p(c.work_dir);
    switch (stage) {
        case Stage::Ingest: return {{c.articles}, {p.articles}, false};
        case Stage::Personas: return {{p.articles}, {p.personas_text}, true};
        case Stage::Expand: return {{p.personas_text}, {p.personas_expanded}, true};
        case Stage::Dedup: return {{p.personas_text, p.personas_expanded}, {p.personas, p.persona_drops}, false};
        case Stage::Synthesize: return {{p.personas, c.exemplars}, {p.synthetic, p.synth_report}, true};
        case Stage::Translate:
            return {{c.source_pairs}, {p.translated, p.assignments, p.translate_report}, true};
        case Stage::Assemble: {
            StageIO io{{p.synthetic, p.translated}, {p.dataset, p.manifest, p.decon_drops}, false};
            if (c.eval_set) io.inputs.push_back(*c.eval_set);
            return io;
        }
        case Stage::Evaluate: return {{p.manifest, c.generations}, {p.verdicts}, true};
        case Stage::Report: return {{p.verdicts, c.generations, p.dataset}, {p.report}, false};
    }
    return {};
}

namespace {

std::unique_ptr<Gateway> make_gateway(const PipelineConfig& c, const RunOptions& o) {
    std::shared_ptr<Backend> backend = o.backend;
    if (!backend) {
        if (c.mock_fixture) backend = MockBackend::load_fixture(*c.mock_fixture);
        else backend = std::make_shared<HttpBackend>(c.gateway);
    }
    auto clock = o.clock ? o.clock : std::make_shared<SteadyClock>();
    return std::make_unique<Gateway>(c.gateway, std::move(backend), std::move(clock));
}

std::string plan(Stage stage, const PipelineConfig& c, const StageIO& io) {
    std::ostringstream ss;
    ss << "plan " << to_string(stage) << ": inputs [";
    for (std::size_t i = 0; i < io.inputs.size(); ++i) {
        ss << (i ? ", " : "") << io.inputs[i].string() << (fs::exists(io.inputs[i]) ? "" : " (missing)");
    }
    ss << "] outputs [";
    for (std::size_t i = 0; i < io.outputs.size(); ++i) ss << (i ? ", " : "") << io.outputs[i].string();
    ss << "]";
    if (io.uses_gateway) {
        ss << " gateway " << (c.mock_fixture ? "mock:" + c.mock_fixture->string() : c.gateway.endpoint_url)
           << " model " << c.gateway.model_id;
    }
    ss << " seed " << c.seed;
    return ss.str();
}

std::size_t quota_total(const LanguageQuota& q) {
    std::size_t n = 0;
    for (const auto& [l, k] : q) n += k;
    return n;
}

StageOutcome run_ingest(const PipelineConfig& c) {
    const Paths p(c.work_dir);
    auto loaded = load_articles(c.articles, c.articles_format);
    for (auto& d : loaded.docs) d.body = truncate_words(d.body, c.word_limit);
    write_articles(p.articles, loaded.docs);
    std::ostringstream ss;
    ss << "ingest: " << loaded.docs.size() << " articles (" << loaded.empty_bodies_dropped << " empty, "
       << loaded.duplicate_ids_dropped << " duplicate) truncated to " << c.word_limit << " words -> "
       << p.articles.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_personas(const PipelineConfig& c, Gateway& gw) {
    const Paths p(c.work_dir);
    const auto docs = read_articles(p.articles);
    auto report = text_to_personas_batch(docs, gw);
    write_personas(p.personas_text, report.personas);
    std::ostringstream ss;
    ss << "personas: " << report.personas.size() << " from " << report.inputs << " articles ("
       << report.empty_yields << " empty yields, " << report.rejected << " rejected, " << report.gateway_failures
       << " gateway failures) -> " << p.personas_text.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_expand(const PipelineConfig& c, Gateway& gw) {
    const Paths p(c.work_dir);
    const auto seeds = read_personas(p.personas_text);
    auto report = expand_personas_batch(seeds, gw, c.expansion_depth);
    write_personas(p.personas_expanded, report.personas);
    std::ostringstream ss;
    ss << "expand: " << report.personas.size() << " expanded from " << report.inputs << " seeds (depth "
       << c.expansion_depth << ", " << report.rejected << " rejected, " << report.overflow_dropped
       << " over cap, " << report.already_known << " already known, " << report.gateway_failures
       << " gateway failures) -> " << p.personas_expanded.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_dedup(const PipelineConfig& c) {
    const Paths p(c.work_dir);
    auto all = read_personas(p.personas_text);
    for (auto& e : read_personas(p.personas_expanded)) all.push_back(std::move(e));

    std::vector<TextItem> items;
    items.reserve(all.size());
    for (const auto& persona : all) items.push_back({persona.persona_id, persona.description});
    const auto result = dedup(items, c.dedup);

    // kept_ids is in input order; identical personas share an id, keep the first.
    std::vector<Persona> kept;
    std::set<std::string> keep(result.kept_ids.begin(), result.kept_ids.end());
    std::set<std::string> emitted;
    for (const auto& persona : all) {
        if (keep.contains(persona.persona_id) && emitted.insert(persona.persona_id).second) kept.push_back(persona);
    }
    write_personas(p.personas, kept);
    write_file_atomic(p.persona_drops, drop_report_jsonl(result.dropped));
    std::ostringstream ss;
    ss << "dedup: " << all.size() << " personas, " << kept.size() << " kept, " << result.dropped.size()
       << " dropped (k=" << c.dedup.shingle_size << ", threshold " << c.dedup.threshold << ") -> "
       << p.personas.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_synthesize(const PipelineConfig& c, Gateway& gw) {
    const Paths p(c.work_dir);
    const auto personas = read_personas(p.personas);
    const auto exemplars = read_exemplars(c.exemplars);
    SynthesisOptions opts;
    opts.extra_attempts_per_language = c.synth_extra_attempts;
    opts.mode = c.synth_mode;
    auto result = synthesize_batch(personas, c.synth_quota, exemplars, gw, opts);
    write_records(p.synthetic, result.records);
    write_file_atomic(p.synth_report, result.report().dump(2) + "\n");
    std::ostringstream ss;
    ss << "synthesize: " << result.records.size() << "/" << quota_total(c.synth_quota) << " records, "
       << result.failures.size() << " failed attempts";
    if (!result.quota_met()) {
        ss << ", QuotaUnmet for " << result.unmet.size() << " language(s); see " << p.synth_report.string();
        return {kExitQuotaUnmet, ss.str()};
    }
    ss << " -> " << p.synthetic.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_translate(const PipelineConfig& c, Gateway& gw) {
    const Paths p(c.work_dir);
    const auto pairs = read_source_pairs(c.source_pairs);
    auto result = translate_batch(pairs, c.translate_quota, c.seed, gw);
    write_records(p.translated, result.records);
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& a : result.assignments) {
        rows.push_back({{"pair_id", a.pair_id}, {"target_language", a.target_language}});
    }
    write_file_atomic(p.assignments, to_jsonl(rows));
    write_file_atomic(p.translate_report, result.report().dump(2) + "\n");
    std::ostringstream ss;
    ss << "translate: " << result.records.size() << "/" << quota_total(c.translate_quota) << " records from "
       << result.assignments.size() << " sampled pairs, " << result.failures.size() << " failed";
    if (!result.quota_met()) {
        ss << ", QuotaUnmet for " << result.unmet.size() << " language(s); see " << p.translate_report.string();
        return {kExitQuotaUnmet, ss.str()};
    }
    ss << " -> " << p.translated.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_assemble(const PipelineConfig& c) {
    const Paths p(c.work_dir);
    auto records = read_records(p.synthetic);
    for (auto& r : read_records(p.translated)) records.push_back(std::move(r));
    std::vector<std::string> questions;
    if (c.eval_set) {
        for (auto& q : read_eval_set(*c.eval_set)) questions.push_back(std::move(q.question));
    }
    AssemblyOptions opts;
    opts.name = c.dataset_name;
    opts.eval_set_name = c.eval_set_name;
    opts.seed = c.seed;
    opts.dedup = c.dedup;
    opts.created_at = c.created_at;
    auto result = assemble(records, c.target_languages, c.per_language_count, questions, opts);
    write_jsonl(result.dataset, p.dataset);
    write_file_atomic(p.decon_drops, drop_report_jsonl(result.decontaminated));
    const auto& m = result.dataset.manifest;
    std::ostringstream ss;
    ss << "assemble: " << result.dataset.records.size() << " records (" << m.per_language_count << " x "
       << m.languages.size() << " languages), " << m.decontamination_removed << " decontaminated, "
       << m.exact_duplicates_removed << " exact duplicates -> " << p.dataset.string();
    return {kExitOk, ss.str()};
}

StageOutcome run_evaluate(const PipelineConfig& c, Gateway* gw) {
    const Paths p(c.work_dir);
    const auto items = read_eval_items(c.generations);
    auto run = evaluate_items(items, gw, c.eval_method);
    write_verdicts(p.verdicts, run.verdicts);
    std::ostringstream ss;
    ss << "evaluate: " << run.verdicts.size() << " items, " << run.judge_calls << " judge calls, "
       << run.gateway_failures << " gateway failures, " << run.unscored << " unscored -> " << p.verdicts.string();
    return {run.unscored > 0 ? kExitUnscored : kExitOk, ss.str()};
}

StageOutcome run_report(const PipelineConfig& c) {
    const Paths p(c.work_dir);
    const auto items = read_eval_items(c.generations);
    const auto verdicts = read_verdicts(p.verdicts);
    const auto report = score_run(items, verdicts, c.exclude_languages);
    const auto records = read_jsonl(p.dataset).records;
    nlohmann::ordered_json out;
    out["evaluation"] = report.to_json();
    out["dataset"] = stats(records).to_json();
    write_file_atomic(p.report, out.dump(2) + "\n");
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(4);
    ss << "report: " << report.n_items.size() << " languages, overall " << report.overall_avg;
    if (report.filtered_avg) ss << ", filtered " << *report.filtered_avg;
    ss << " -> " << p.report.string();
    return {kExitOk, ss.str()};
}

}  // namespace

StageOutcome run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options) {
    const auto io = stage_io(stage, config);
    if (options.dry_run) return {kExitOk, plan(stage, config, io)};

    for (const auto& in : io.inputs) {
        if (!fs::exists(in)) {
            return {kExitMissingUpstream,
                    std::string(to_string(stage)) + ": MissingUpstream: " + in.string() + " does not exist"};
        }
    }
    try {
        std::unique_ptr<Gateway> gw;
        const bool needs_gateway =
            io.uses_gateway && !(stage == Stage::Evaluate && config.eval_method == EvalMethod::ExactMatch &&
                                 !config.mock_fixture && !options.backend && !std::getenv(config.gateway.api_key_env_var.c_str()));
        if (needs_gateway) gw = make_gateway(config, options);
        switch (stage) {
            case Stage::Ingest: return run_ingest(config);
            case Stage::Personas: return run_personas(config, *gw);
            case Stage::Expand: return run_expand(config, *gw);
            case Stage::Dedup: return run_dedup(config);
            case Stage::Synthesize: return run_synthesize(config, *gw);
            case Stage::Translate: return run_translate(config, *gw);
            case Stage::Assemble: return run_assemble(config);
            case Stage::Evaluate: return run_evaluate(config, gw.get());
            case Stage::Report: return run_report(config);
        }
    } catch (const Error& e) {
        const int code = e.kind() == ErrorKind::Config ? kExitConfig : kExitFailure;
        return {code, std::string(to_string(stage)) + ": " + e.what()};
    } catch (const std::exception& e) {
        return {kExitFailure, std::string(to_string(stage)) + ": " + e.what()};
    }
    return {kExitFailure, "unknown stage"};
}

}  // namespace afrisynth
