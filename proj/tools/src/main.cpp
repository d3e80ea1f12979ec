#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using layerpatch::cli::CliConfig;

void add_bundle_source(CLI::App* cmd, CliConfig& config) {
    auto* bundle = cmd->add_option("--bundle", config.bundle_path,
                                   "Path to an exported image archive (tar)");
    auto* store = cmd->add_option("--store-root", config.store_root,
                                  "Directory laid out like an unpacked bundle; edits write back "
                                  "in place");
    bundle->excludes(store);
    store->excludes(bundle);
    cmd->callback([bundle, store]() {
        if (bundle->count() == 0 && store->count() == 0) {
            throw CLI::RequiredError("--bundle or --store-root");
        }
    });
}

void add_plan_inputs(CLI::App* cmd, CliConfig& config) {
    cmd->add_option("--context", config.context_dir, "Build context directory")->required();
    cmd->add_option("--dockerfile-old", config.dockerfile_old,
                    "Dockerfile the bundle was built from")
        ->required();
    cmd->add_option("--dockerfile-new", config.dockerfile_new,
                    "Updated Dockerfile (defaults to --dockerfile-old)");
    cmd->add_flag("--assume-interpreted", config.interpreted,
                  "Treat source files as interpreted: layers after an injection stay cached");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"layerpatch - incremental container image updates by direct layer injection"};
    app.require_subcommand(1);

    CliConfig config;
    app.add_option("--format", config.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    app.add_flag("-v,--verbose", config.verbosity, "Verbose progress on stderr");

    CLI::App* inspect = app.add_subcommand("inspect", "Show the layer table of a bundle");
    add_bundle_source(inspect, config);

    CLI::App* plan_cmd = app.add_subcommand("plan", "Plan a rebuild: baseline vs injection");
    add_bundle_source(plan_cmd, config);
    add_plan_inputs(plan_cmd, config);

    CLI::App* inject = app.add_subcommand("inject", "Inject context changes into the bundle");
    add_bundle_source(inject, config);
    add_plan_inputs(inject, config);
    inject->add_option("--mode", config.mode, "Injection mode")
        ->check(CLI::IsMember({"inplace", "clone"}))
        ->capture_default_str();
    inject->add_option("--output", config.output_path, "Where to write the updated bundle");

    CLI::App* verify = app.add_subcommand("verify", "Recompute and compare layer checksums");
    add_bundle_source(verify, config);

    CLI::App* bench = app.add_subcommand("bench", "Measure full rebuild vs injection");
    bench->add_option("--scenario", config.scenarios,
                      "Scenario name or number (repeatable; default: all)");
    bench->add_option("--trials", config.trials, "Trials per scenario")->capture_default_str();
    bench->add_option("--seed", config.seed, "Seed for synthetic payloads")
        ->capture_default_str();
    bench->add_option("--step-delay-ms", config.step_delay_ms,
                      "Simulated per-step builder overhead for rebuilt layers")
        ->capture_default_str();
    bench->add_option("--output", config.output_path, "Write the JSON report here");

    CLI::App* mkbundle =
        app.add_subcommand("mkbundle", "Build a bundle from a Dockerfile and context directory");
    mkbundle->add_option("--dockerfile", config.dockerfile_path, "Dockerfile to build")
        ->required();
    mkbundle->add_option("--context", config.context_dir, "Build context directory");
    mkbundle->add_option("--output", config.output_path, "Bundle path to write")->required();
    mkbundle->add_option("--tag", config.repo_tag, "Repository tag")->capture_default_str();
    mkbundle->add_option("--run-payload-bytes", config.run_payload_bytes,
                         "Synthetic payload size for each RUN layer");
    mkbundle->add_option("--seed", config.seed, "Seed for synthetic payloads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : layerpatch::cli::kExitInput;
    }

    if (inspect->parsed()) {
        return layerpatch::cli::cmd_inspect(config);
    }
    if (plan_cmd->parsed()) {
        return layerpatch::cli::cmd_plan(config);
    }
    if (inject->parsed()) {
        if (config.store_root.empty() && config.output_path.empty()) {
            std::fprintf(stderr, "inject: --output is required with --bundle\n");
            return layerpatch::cli::kExitInput;
        }
        return layerpatch::cli::cmd_inject(config);
    }
    if (verify->parsed()) {
        return layerpatch::cli::cmd_verify(config);
    }
    if (bench->parsed()) {
        return layerpatch::cli::cmd_bench(config);
    }
    if (mkbundle->parsed()) {
        return layerpatch::cli::cmd_mkbundle(config);
    }
    return layerpatch::cli::kExitInput;
}
