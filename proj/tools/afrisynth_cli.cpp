#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "afrisynth/error.hpp"
#include "afrisynth/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"afrisynth: multilingual math instruction data pipeline"};
    app.require_subcommand(1);

    std::string stage_name;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;

    auto* run = app.add_subcommand("run", "run one pipeline stage");
    std::string stages;
    for (auto s : afrisynth::all_stages()) stages += (stages.empty() ? "" : "|") + std::string(afrisynth::to_string(s));
    run->add_option("stage", stage_name, stages)->required();
    run->add_option("--config", config_path, "pipeline config (JSON)")->required();
    run->add_option("--seed", seed, "override the configured seed");
    run->add_flag("--dry-run", dry_run, "print the plan without running");

    auto* stages_cmd = app.add_subcommand("stages", "list stages with their upstream stages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : afrisynth::kExitConfig;
    }

    if (stages_cmd->parsed()) {
        for (auto s : afrisynth::all_stages()) {
            std::cout << afrisynth::to_string(s);
            const auto up = afrisynth::upstream_stages(s);
            for (std::size_t i = 0; i < up.size(); ++i) std::cout << (i ? ", " : " <- ") << afrisynth::to_string(up[i]);
            std::cout << '\n';
        }
        return 0;
    }

    const auto stage = afrisynth::parse_stage(stage_name);
    if (!stage) {
        std::cerr << "unknown stage '" << stage_name << "' (expected " << stages << ")\n";
        return afrisynth::kExitConfig;
    }

    afrisynth::PipelineConfig config;
    try {
        config = afrisynth::load_config(config_path, seed);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return afrisynth::kExitConfig;
    }

    afrisynth::RunOptions options;
    options.dry_run = dry_run;
    const auto outcome = afrisynth::run_stage(*stage, config, options);
    (outcome.exit_code == 0 ? std::cout : std::cerr) << outcome.summary << '\n';
    return outcome.exit_code;
}
