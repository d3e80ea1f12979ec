#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "layerpatch/bench.hpp"
#include "layerpatch/builder.hpp"
#include "layerpatch/bundle.hpp"
#include "layerpatch/dockerfile.hpp"
#include "layerpatch/errors.hpp"
#include "layerpatch/injector.hpp"
#include "layerpatch/integrity.hpp"
#include "layerpatch/planner.hpp"

namespace layerpatch::cli {

namespace {

using nlohmann::json;

bool is_input_error(Errc code) {
    switch (code) {
    case Errc::MissingManifest:
    case Errc::MalformedJson:
    case Errc::DanglingLayerPointer:
    case Errc::BadVersionMarker:
    case Errc::IoFailure:
    case Errc::NotADirectory:
    case Errc::UnparsableLine:
    case Errc::MultiStageBuild:
    case Errc::AlignmentMismatch:
    case Errc::MissingContext:
    case Errc::UnsupportedCopySpec:
    case Errc::UnknownScenario:
    case Errc::DegenerateSample:
        return true;
    default:
        return false;
    }
}

int exit_code_for(const Error& e, int fallback) {
    if (is_input_error(e.code())) {
        return kExitInput;
    }
    if (e.code() == Errc::MultiContentChange) {
        return kExitNonInjectable;
    }
    if (e.code() == Errc::RewriteMiss) {
        return kExitPipeline;
    }
    return fallback;
}

ImageBundle load_input(const CliConfig& config) {
    if (!config.store_root.empty()) {
        return open_store(config.store_root);
    }
    return load_bundle(config.bundle_path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::IoFailure, path);
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

DockerfileModel load_dockerfile(const std::string& path) {
    return parse_dockerfile(read_text_file(path));
}

std::string action_label(const LayerAction& action) {
    switch (action.kind) {
    case ActionKind::UseCache:
        return "UseCache";
    case ActionKind::Inject:
        return "Inject(" + std::to_string(action.deltas.size()) + ")";
    case ActionKind::Rebuild:
        return "Rebuild";
    }
    return "?";
}

json receipt_json(const InjectionReceipt& receipt) {
    json occurrences = json::array();
    for (const auto& [path, count] : receipt.rewrite.occurrences) {
        occurrences.push_back({{"document", path}, {"count", count}});
    }
    return {{"old_layer_id", receipt.old_layer_id},
            {"new_layer_id", receipt.new_layer_id},
            {"old_digest", receipt.old_digest.hex()},
            {"new_digest", receipt.new_digest.hex()},
            {"files_touched", receipt.files_touched},
            {"bytes_written", receipt.bytes_written},
            {"rewrites", occurrences}};
}

void save_output_atomically(const ImageBundle& bundle, const std::string& output_path) {
    std::filesystem::path target(output_path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    save_bundle(bundle, tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        raise(Errc::IoFailure, output_path + ": " + ec.message());
    }
}

struct PlanContext {
    ImageBundle bundle;
    DockerfileModel old_model;
    DockerfileModel new_model;
    FileTree context;
    RebuildPlan plan;
};

PlanContext make_plan(const CliConfig& config) {
    PlanContext ctx;
    ctx.bundle = load_input(config);
    ctx.old_model = load_dockerfile(config.dockerfile_old);
    ctx.new_model = config.dockerfile_new.empty() ? ctx.old_model
                                                  : load_dockerfile(config.dockerfile_new);
    ctx.context = tree_from_directory(config.context_dir);
    ctx.plan = plan(ctx.old_model, ctx.new_model, ctx.bundle, ctx.context, config.interpreted);
    return ctx;
}

} // namespace

int cmd_inspect(const CliConfig& config) try {
    ImageBundle bundle = load_input(config);

    json rows = json::array();
    std::size_t layer_idx = 0;
    for (std::size_t h = 0; h < bundle.config.history.size(); ++h) {
        const HistoryEntry& entry = bundle.config.history[h];
        json row;
        row["index"] = h;
        row["instruction"] = entry.created_by;
        row["empty_layer"] = entry.empty_layer;
        if (!entry.empty_layer) {
            const LayerRecord& layer = bundle.layer_at(layer_idx++);
            row["layer_id"] = layer.id;
            row["size"] = layer.payload.size();
            row["digest"] = layer.payload_digest.hex();
        }
        rows.push_back(std::move(row));
    }

    if (config.format == "json") {
        std::cout << json{{"layers", rows}}.dump(2) << "\n";
        return kExitOk;
    }
    std::printf("%-4s  %-12s  %-44s  %10s  %-12s  %s\n", "IDX", "LAYER ID", "INSTRUCTION", "SIZE",
                "DIGEST", "EMPTY");
    for (const json& row : rows) {
        std::string instruction = row["instruction"].get<std::string>();
        if (instruction.size() > 44) {
            instruction = instruction.substr(0, 41) + "...";
        }
        bool empty = row["empty_layer"].get<bool>();
        std::printf("%-4zu  %-12s  %-44s  %10s  %-12s  %s\n", row["index"].get<std::size_t>(),
                    empty ? "-" : row["layer_id"].get<std::string>().substr(0, 12).c_str(),
                    instruction.c_str(),
                    empty ? "-" : std::to_string(row["size"].get<std::uint64_t>()).c_str(),
                    empty ? "-" : row["digest"].get<std::string>().substr(0, 12).c_str(),
                    empty ? "yes" : "no");
    }
    return kExitOk;
} catch (const Error& e) {
    std::cerr << "inspect: " << e.what() << "\n";
    return kExitInput;
}

int cmd_plan(const CliConfig& config) try {
    PlanContext ctx = make_plan(config);

    if (config.format == "json") {
        json baseline = json::array();
        json actions = json::array();
        for (const LayerAction& a : ctx.plan.baseline) {
            baseline.push_back(action_label(a));
        }
        for (const LayerAction& a : ctx.plan.actions) {
            json entry;
            entry["action"] = action_label(a);
            if (a.kind == ActionKind::Rebuild) {
                entry["reason"] = a.reason;
            }
            if (a.kind == ActionKind::Inject) {
                entry["deltas"] = a.deltas.size();
            }
            actions.push_back(std::move(entry));
        }
        std::cout << json{{"baseline", baseline},
                          {"actions", actions},
                          {"nothing_to_do", ctx.plan.all_use_cache()}}
                         .dump(2)
                  << "\n";
        return kExitOk;
    }

    std::printf("%-4s  %-40s  %-10s  %s\n", "STEP", "INSTRUCTION", "BASELINE", "INJECTION");
    for (std::size_t i = 0; i < ctx.plan.actions.size(); ++i) {
        std::string text = ctx.new_model.instructions[i].text();
        if (text.size() > 40) {
            text = text.substr(0, 37) + "...";
        }
        std::string note = action_label(ctx.plan.actions[i]);
        if (ctx.plan.actions[i].kind == ActionKind::Rebuild) {
            note += " (" + ctx.plan.actions[i].reason + ")";
        }
        std::printf("%-4zu  %-40s  %-10s  %s\n", i + 1, text.c_str(),
                    action_label(ctx.plan.baseline[i]).c_str(), note.c_str());
    }
    if (ctx.plan.all_use_cache()) {
        std::cout << "nothing to do: no instruction or context change detected\n";
    }
    return kExitOk;
} catch (const Error& e) {
    std::cerr << "plan: " << e.what() << "\n";
    return exit_code_for(e, kExitInput);
}

int cmd_inject(const CliConfig& config) try {
    PlanContext ctx = make_plan(config);

    if (ctx.plan.all_use_cache()) {
        std::cout << "nothing to inject: bundle already matches the context\n";
        if (!config.output_path.empty()) {
            save_output_atomically(ctx.bundle, config.output_path);
        }
        return kExitOk;
    }

    std::size_t inject_index = ctx.plan.actions.size();
    for (std::size_t i = 0; i < ctx.plan.actions.size(); ++i) {
        const LayerAction& action = ctx.plan.actions[i];
        if (action.kind == ActionKind::Inject) {
            inject_index = i;
        } else if (action.kind == ActionKind::Rebuild) {
            bool config_change = ctx.new_model.instructions[i].kind == LayerKind::Configuration;
            if (config_change) {
                std::cout << "delegating config change at step " << i + 1
                          << " - rebuild required\n";
            } else {
                std::cout << "step " << i + 1 << " needs a rebuild (" << action.reason
                          << ") - not injectable\n";
            }
            return kExitNonInjectable;
        }
    }
    if (inject_index == ctx.plan.actions.size()) {
        std::cout << "plan has no injectable layer\n";
        return kExitNonInjectable;
    }

    LayerAlignment alignment = align_layers(ctx.old_model, ctx.bundle);
    std::size_t layer_index = *alignment.layer_of_instruction[inject_index];
    InjectMode mode = config.mode == "inplace" ? InjectMode::InPlace : InjectMode::CloneFirst;
    InjectionReceipt receipt =
        apply_changeset(ctx.bundle, layer_index, ctx.plan.actions[inject_index].deltas, mode);

    std::vector<IntegrityRow> rows = verify_integrity(ctx.bundle);
    if (!all_ok(rows)) {
        std::cerr << "inject: integrity check failed after rewrite\n";
        return kExitPipeline;
    }

    if (!config.store_root.empty()) {
        flush_store(ctx.bundle);
    } else if (!config.output_path.empty()) {
        save_output_atomically(ctx.bundle, config.output_path);
    }

    if (config.format == "json") {
        std::cout << receipt_json(receipt).dump(2) << "\n";
    } else {
        std::cout << "injected layer " << receipt.old_layer_id.substr(0, 12) << " -> "
                  << receipt.new_layer_id.substr(0, 12) << "\n"
                  << "  files touched: " << receipt.files_touched << "\n"
                  << "  bytes written: " << receipt.bytes_written << "\n"
                  << "  old digest:    " << receipt.old_digest.hex() << "\n"
                  << "  new digest:    " << receipt.new_digest.hex() << "\n"
                  << "  rewrites:      " << receipt.rewrite.total() << " occurrence(s) in "
                  << receipt.rewrite.occurrences.size() << " document(s)\n";
    }
    return kExitOk;
} catch (const Error& e) {
    std::cerr << "inject: " << e.what() << "\n";
    return exit_code_for(e, kExitPipeline);
}

int cmd_verify(const CliConfig& config) try {
    ImageBundle bundle = load_input(config);
    std::vector<IntegrityRow> rows = verify_integrity(bundle);

    if (config.format == "json") {
        json out = json::array();
        for (const IntegrityRow& row : rows) {
            out.push_back({{"layer_id", row.layer_id},
                           {"recorded", row.recorded.hex()},
                           {"actual", row.actual.hex()},
                           {"ok", row.ok}});
        }
        std::cout << json{{"layers", out}, {"ok", all_ok(rows)}}.dump(2) << "\n";
    } else {
        std::printf("%-14s  %-14s  %-14s  %s\n", "LAYER", "RECORDED", "ACTUAL", "OK");
        for (const IntegrityRow& row : rows) {
            std::printf("%-14s  %-14s  %-14s  %s\n", row.layer_id.substr(0, 12).c_str(),
                        row.recorded.hex().substr(0, 12).c_str(),
                        row.actual.hex().substr(0, 12).c_str(), row.ok ? "ok" : "MISMATCH");
        }
    }
    return all_ok(rows) ? kExitOk : kExitIntegrity;
} catch (const Error& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitInput;
}

int cmd_bench(const CliConfig& config) try {
    std::vector<Scenario> selected;
    if (config.scenarios.empty()) {
        selected = default_scenarios(config.seed);
    } else {
        for (const std::string& name : config.scenarios) {
            selected.push_back(scenario_by_name(name, config.seed));
        }
    }

    std::vector<ScenarioResult> results;
    for (const Scenario& scenario : selected) {
        if (config.verbosity > 0) {
            std::cerr << "running scenario " << scenario.name << " (" << config.trials
                      << " trials)\n";
        }
        ScenarioResult result;
        result.name = scenario.name;
        result.h0 = scenario.h0;
        result.samples = run_scenario(scenario, config.trials, config.seed, config.step_delay_ms);
        results.push_back(std::move(result));
    }

    std::string json_report = report_json(results);
    if (!config.output_path.empty()) {
        std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            raise(Errc::IoFailure, config.output_path);
        }
        out << json_report << "\n";
    }
    if (config.format == "json") {
        std::cout << json_report << "\n";
    } else {
        std::cout << report_table(results);
    }
    return kExitOk;
} catch (const Error& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return kExitInput;
}

int cmd_mkbundle(const CliConfig& config) try {
    DockerfileModel model = load_dockerfile(config.dockerfile_path);
    FileTree context = config.context_dir.empty() ? FileTree{}
                                                  : tree_from_directory(config.context_dir);
    BuildOptions opts;
    opts.repo_tag = config.repo_tag;
    std::uint64_t payload_bytes = config.run_payload_bytes;
    std::uint64_t seed = config.seed;
    opts.run_output = [payload_bytes, seed](const Instruction&, std::size_t index) {
        return synthetic_tree(seed + index, payload_bytes);
    };
    ImageBundle bundle = build_bundle(model, context, opts);
    save_output_atomically(bundle, config.output_path);
    std::cout << "wrote " << config.output_path << " (" << bundle.layer_count() << " layers)\n";
    return kExitOk;
} catch (const Error& e) {
    std::cerr << "mkbundle: " << e.what() << "\n";
    return kExitInput;
}

} // namespace layerpatch::cli
