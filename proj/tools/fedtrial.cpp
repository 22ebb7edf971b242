#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedtrial/config.hpp"
#include "fedtrial/errors.hpp"
#include "fedtrial/log.hpp"
#include "fedtrial/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "Path to the JSON config file");
    if (config_required)
        c->required();
    cmd->add_option("--seed", opts.seed, "Override the config seed");
    cmd->add_option("--out", opts.out_dir, "Override the output directory");
}

fedtrial::RunConfig load(const CommonOpts& opts) {
    fedtrial::RunConfig config = fedtrial::load_run_config(opts.config_path);
    if (opts.seed) {
        config.seed = *opts.seed;
        config.generator.seed = *opts.seed;
    }
    if (!opts.out_dir.empty())
        config.paths.out = opts.out_dir;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic multi-center treatment-failure training scenarios"};
    app.require_subcommand(1);

    CommonOpts gen_opts;
    auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic cohort and its labels");
    add_common(gen_cmd, gen_opts);

    CommonOpts split_opts;
    auto* split_cmd = app.add_subcommand("split", "Write a stratified train/test split");
    add_common(split_cmd, split_opts);

    CommonOpts run_opts;
    std::string scenario_name;
    std::vector<int> centers;
    auto* run_cmd = app.add_subcommand("run", "Train and evaluate one scenario");
    run_cmd->add_option("scenario", scenario_name, "One of: local, central, federated, sweep")
        ->required();
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--centers", centers, "Participating center ids (federated only)")
        ->delimiter(',');

    std::uint64_t check_seed = 1;
    auto* check_cmd =
        app.add_subcommand("check-gradients", "Verify backpropagation against finite differences");
    check_cmd->add_option("--seed", check_seed, "Seed for the random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors share the config-error exit code
    }

    try {
        std::string summary;
        if (gen_cmd->parsed()) {
            summary = fedtrial::run_generate(load(gen_opts));
        } else if (split_cmd->parsed()) {
            summary = fedtrial::run_split(load(split_opts));
        } else if (run_cmd->parsed()) {
            const auto scenario = fedtrial::scenario_from_string(scenario_name);
            if (!centers.empty() && scenario != fedtrial::Scenario::Federated)
                throw fedtrial::ConfigError("--centers only applies to the federated scenario");
            summary = fedtrial::run_scenario(load(run_opts), scenario, centers);
        } else if (check_cmd->parsed()) {
            summary = fedtrial::run_gradient_check(check_seed);
            std::fputs(summary.c_str(), stdout);
            return summary.find("\"pass\": true") != std::string::npos ? 0 : 1;
        }
        std::fputs(summary.c_str(), stdout);
        return 0;
    } catch (const fedtrial::ConfigError& e) {
        fedtrial::log::error(e.what());
        return 2;
    } catch (const fedtrial::MetricError& e) {
        fedtrial::log::error("UNDEFINED metric: ", e.what());
        return 1;
    } catch (const fedtrial::Error& e) {
        fedtrial::log::error(e.what());
        return 1;
    } catch (const std::exception& e) {
        fedtrial::log::error("unexpected failure: ", e.what());
        return 1;
    }
}
