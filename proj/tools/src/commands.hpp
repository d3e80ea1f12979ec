#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace layerpatch::cli {

// Exit code contract: 0 success, 1 integrity failure, 2 input error,
// 3 non-injectable plan, 4 rewrite/integrity pipeline failure.
constexpr int kExitOk = 0;
constexpr int kExitIntegrity = 1;
constexpr int kExitInput = 2;
constexpr int kExitNonInjectable = 3;
constexpr int kExitPipeline = 4;

struct CliConfig {
    std::string bundle_path;
    std::string store_root;
    std::string context_dir;
    std::string dockerfile_old;
    std::string dockerfile_new;
    std::string mode = "clone"; // inplace | clone
    bool interpreted = false;
    std::string output_path;
    std::string format = "text"; // text | json
    int verbosity = 0;

    // bench
    std::vector<std::string> scenarios;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    double step_delay_ms = 2.0;

    // mkbundle
    std::string dockerfile_path;
    std::string repo_tag = "demo:latest";
    std::uint64_t run_payload_bytes = 0;
};

int cmd_inspect(const CliConfig& config);
int cmd_plan(const CliConfig& config);
int cmd_inject(const CliConfig& config);
int cmd_verify(const CliConfig& config);
int cmd_bench(const CliConfig& config);
int cmd_mkbundle(const CliConfig& config);

} // namespace layerpatch::cli
