#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afrisynth/clock.hpp"
#include "afrisynth/corpus.hpp"
#include "afrisynth/eval.hpp"
#include "afrisynth/gateway.hpp"
#include "afrisynth/minhash.hpp"
#include "afrisynth/synthesis.hpp"

namespace afrisynth {

enum class Stage { Ingest, Personas, Expand, Dedup, Synthesize, Translate, Assemble, Evaluate, Report };

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view name) noexcept;
const std::vector<Stage>& all_stages();

struct PipelineConfig {
    GatewayConfig gateway;
    std::optional<std::filesystem::path> mock_fixture;  // set: offline mock backend
    std::vector<std::string> target_languages;
    std::uint64_t seed = 0;
    std::filesystem::path work_dir;

    std::filesystem::path articles;
    ArticleFormat articles_format = ArticleFormat::Jsonl;
    std::filesystem::path exemplars;
    std::filesystem::path source_pairs;
    std::optional<std::filesystem::path> eval_set;
    std::filesystem::path generations;

    std::size_t word_limit = 200;
    int expansion_depth = 1;
    DedupParams dedup;
    LanguageQuota synth_quota;
    std::size_t synth_extra_attempts = 0;
    TaskMode synth_mode = TaskMode::Math;
    LanguageQuota translate_quota;
    std::string dataset_name = "dataset";
    std::size_t per_language_count = 0;
    std::string eval_set_name;
    std::string created_at;  // empty: current time / SOURCE_DATE_EPOCH
    EvalMethod eval_method = EvalMethod::Judge;
    std::set<std::string> exclude_languages{"eng", "fra"};

    /// Relative paths resolve against `base_dir`. Throws ConfigError.
    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

PipelineConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});

struct StageIO {
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    bool uses_gateway = false;
};

/// Declared inputs/outputs of a stage; a stage reads nothing else.
StageIO stage_io(Stage stage, const PipelineConfig& config);

/// Stages that must have run before `stage` (direct edges only).
std::vector<Stage> upstream_stages(Stage stage);

struct RunOptions {
    bool dry_run = false;
    /// Overrides the configured backend (tests). Null: mock fixture or HTTP.
    std::shared_ptr<Backend> backend;
    std::shared_ptr<Clock> clock;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitMissingUpstream = 3,
    kExitQuotaUnmet = 4,
    kExitUnscored = 5,
};

struct StageOutcome {
    int exit_code = kExitOk;
    std::string summary;  // one line
};

/// Runs one stage: checks declared inputs exist, reads them, writes outputs
/// atomically. Never throws for stage failures; they map to exit codes.
StageOutcome run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options = {});

}  // namespace afrisynth
