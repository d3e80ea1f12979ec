#include "layerpatch/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "layerpatch/errors.hpp"

namespace layerpatch {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    std::chrono::duration<double> d = Clock::now() - start;
    return std::max(d.count(), 1e-9);
}

void step_delay(double delay_ms) {
    if (delay_ms > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
    }
}

/// Index of the dependency RUN: the first RUN after the first COPY/ADD.
std::size_t dep_run_index(const DockerfileModel& model) {
    bool copy_seen = false;
    for (std::size_t i = 0; i < model.instructions.size(); ++i) {
        const std::string& kw = model.instructions[i].keyword;
        if (kw == "COPY" || kw == "ADD") {
            copy_seen = true;
        } else if (kw == "RUN" && copy_seen) {
            return i;
        }
    }
    return model.instructions.size();
}

FileTree apply_deltas(const FileTree& tree, const std::vector<FileDelta>& deltas) {
    FileTree out = tree;
    for (const FileDelta& delta : deltas) {
        if (delta.op == DeltaOp::Delete) {
            out.remove_subtree(delta.path);
        } else {
            out.place(delta.path, delta.entry);
        }
    }
    return out;
}

struct ScenarioRig {
    DockerfileModel model;
    FileTree new_context;
    BuildOptions opts;
    LayerAlignment alignment;
};

ScenarioRig make_rig(const Scenario& scenario, std::uint64_t seed) {
    ScenarioRig rig;
    rig.model = parse_dockerfile(scenario.dockerfile);
    rig.new_context = apply_deltas(scenario.project, scenario.change);

    std::size_t dep_index = dep_run_index(rig.model);
    std::uint64_t dep_size = scenario.dep_layer_size;
    rig.opts.run_output = [seed, dep_index, dep_size](const Instruction&, std::size_t index) {
        std::uint64_t bytes = index == dep_index ? dep_size : (1 << 20);
        return synthetic_tree(seed * 1315423911u + index, bytes);
    };
    return rig;
}

void rebuild_instruction(ImageBundle& bundle, const ScenarioRig& rig, std::size_t index,
                         double delay_ms) {
    const Instruction& instr = rig.model.instructions[index];
    if (instr.kind == LayerKind::Content && rig.alignment.layer_of_instruction[index]) {
        FileTree tree;
        if (instr.keyword == "COPY" || instr.keyword == "ADD") {
            tree = resolve_copy(instr.arguments, rig.new_context);
        } else { // RUN
            tree = rig.opts.run_output ? rig.opts.run_output(instr, index) : FileTree{};
        }
        rebuild_layer(bundle, *rig.alignment.layer_of_instruction[index], tree);
    }
    step_delay(delay_ms); // every re-created step pays the builder overhead
}

void simulate_full_rebuild(ImageBundle& bundle, const ScenarioRig& rig, const RebuildPlan& plan,
                           double delay_ms) {
    for (std::size_t i = 0; i < plan.baseline.size(); ++i) {
        if (plan.baseline[i].kind == ActionKind::Rebuild) {
            rebuild_instruction(bundle, rig, i, delay_ms);
        }
    }
}

void execute_injection(ImageBundle& bundle, const ScenarioRig& rig, const RebuildPlan& plan,
                       double delay_ms) {
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const LayerAction& action = plan.actions[i];
        if (action.kind == ActionKind::Inject) {
            apply_changeset(bundle, *rig.alignment.layer_of_instruction[i], action.deltas,
                            InjectMode::CloneFirst);
        } else if (action.kind == ActionKind::Rebuild) {
            rebuild_instruction(bundle, rig, i, delay_ms);
        }
    }
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> durations_of(const std::vector<TrialSample>& samples, TrialMethod method) {
    std::vector<double> out;
    for (const TrialSample& s : samples) {
        if (s.method == method) {
            out.push_back(s.duration_s);
        }
    }
    return out;
}

json scenario_block(const ScenarioResult& result) {
    MethodStats full = method_stats(result.samples, TrialMethod::FullRebuild);
    MethodStats inject = method_stats(result.samples, TrialMethod::Inject);
    std::vector<double> speedups = speedup_samples(result.samples);
    double sp_mean = mean_of(speedups);

    HypothesisResult hyp = hypothesis_test(speedups, result.h0);
    json block;
    block["full_rebuild"] = {{"mean_s", full.mean_s}, {"std_s", full.std_s}, {"n", full.n}};
    block["inject"] = {{"mean_s", inject.mean_s}, {"std_s", inject.std_s}, {"n", inject.n}};
    block["speedup"] = {{"mean", sp_mean}, {"std", sample_std(speedups, sp_mean)}};
    block["hypothesis"] = {
        {"h0", hyp.h0}, {"z", hyp.z}, {"p", hyp.p}, {"reject", hyp.reject}};
    return block;
}

} // namespace

std::vector<TrialSample> run_scenario(const Scenario& scenario, std::size_t trials,
                                      std::uint64_t seed, double step_delay_ms) {
    if (trials < 1) {
        raise(Errc::DegenerateSample, "trials must be >= 1");
    }
    ScenarioRig rig = make_rig(scenario, seed);

    std::vector<TrialSample> samples;
    samples.reserve(trials * 2);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        ImageBundle bundle = build_bundle(rig.model, scenario.project, rig.opts);
        rig.alignment = align_layers(rig.model, bundle);

        {
            ImageBundle work = bundle;
            Clock::time_point start = Clock::now();
            RebuildPlan p = plan(rig.model, rig.model, work, rig.new_context, scenario.interpreted);
            simulate_full_rebuild(work, rig, p, step_delay_ms);
            samples.push_back({TrialMethod::FullRebuild, seconds_since(start)});
        }
        {
            ImageBundle work = std::move(bundle);
            Clock::time_point start = Clock::now();
            RebuildPlan p = plan(rig.model, rig.model, work, rig.new_context, scenario.interpreted);
            execute_injection(work, rig, p, step_delay_ms);
            samples.push_back({TrialMethod::Inject, seconds_since(start)});
        }
    }
    return samples;
}

std::vector<double> speedup_samples(const std::vector<TrialSample>& samples) {
    std::vector<double> full = durations_of(samples, TrialMethod::FullRebuild);
    std::vector<double> inject = durations_of(samples, TrialMethod::Inject);
    if (full.size() != inject.size()) {
        raise(Errc::MethodCountMismatch, std::to_string(full.size()) + " full-rebuild vs " +
                                             std::to_string(inject.size()) + " inject samples");
    }
    std::vector<double> ratios;
    ratios.reserve(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        ratios.push_back(full[i] / inject[i]);
    }
    return ratios;
}

HypothesisResult hypothesis_test(const std::vector<double>& samples, double h0) {
    HypothesisResult result;
    result.h0 = h0;
    result.n = samples.size();
    if (result.n < 2) {
        raise(Errc::DegenerateSample, "need at least 2 samples");
    }
    result.mean = mean_of(samples);
    result.stddev = sample_std(samples, result.mean);
    if (result.stddev <= 0.0) {
        raise(Errc::DegenerateSample, "zero standard deviation");
    }
    result.z = (result.mean - h0) / (result.stddev / std::sqrt(static_cast<double>(result.n)));
    result.p = 0.5 * std::erfc(result.z / std::numbers::sqrt2);
    result.reject = result.p < 0.001;
    return result;
}

MethodStats method_stats(const std::vector<TrialSample>& samples, TrialMethod method) {
    std::vector<double> xs = durations_of(samples, method);
    MethodStats stats;
    stats.n = xs.size();
    stats.mean_s = mean_of(xs);
    stats.std_s = sample_std(xs, stats.mean_s);
    return stats;
}

std::string report_json(const std::vector<ScenarioResult>& results) {
    if (results.empty()) {
        raise(Errc::EmptyReport, "no scenario results");
    }
    json report;
    for (const ScenarioResult& result : results) {
        report[result.name] = scenario_block(result);
    }
    char timestamp[32] = {0};
    std::time_t now = std::time(nullptr);
    std::strftime(timestamp, sizeof(timestamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    report["_machine"] = {{"cpus", std::thread::hardware_concurrency()},
                          {"clock", "steady_clock"},
                          {"timestamp", timestamp},
                          {"trials", "sequential"}};
    return report.dump(2);
}

std::string report_table(const std::vector<ScenarioResult>& results) {
    if (results.empty()) {
        raise(Errc::EmptyReport, "no scenario results");
    }
    std::ostringstream out;
    out << "scenario            full mean(s)   inject mean(s)   speedup     h0        p         reject\n";
    for (const ScenarioResult& result : results) {
        MethodStats full = method_stats(result.samples, TrialMethod::FullRebuild);
        MethodStats inject = method_stats(result.samples, TrialMethod::Inject);
        std::vector<double> speedups = speedup_samples(result.samples);
        HypothesisResult hyp = hypothesis_test(speedups, result.h0);
        char line[160];
        std::snprintf(line, sizeof(line), "%-18s  %12.6f   %14.6f   %8.2f   %6.2f   %8.2e   %s\n",
                      result.name.c_str(), full.mean_s, inject.mean_s, mean_of(speedups),
                      result.h0, hyp.p, hyp.reject ? "yes" : "no");
        out << line;
    }
    return out.str();
}

std::vector<Scenario> default_scenarios(std::uint64_t seed) {
    std::vector<Scenario> scenarios;

    {
        Scenario s;
        s.name = "one-line-python";
        s.dockerfile = "FROM python:alpine\n"
                       "COPY . .\n"
                       "RUN pip install -r requirements.txt\n"
                       "CMD [\"python\", \"app.py\"]\n";
        s.project.put_file("app.py", "print(\"hello\")\n");
        s.project.put_file("requirements.txt", "");
        FileDelta d;
        d.path = "app.py";
        d.op = DeltaOp::Modify;
        d.entry.kind = EntryKind::File;
        std::string updated = "print(\"hello\")\nprint(\"one more line\")\n";
        d.entry.content.assign(updated.begin(), updated.end());
        s.change.push_back(std::move(d));
        s.interpreted = true;
        s.dep_layer_size = 0;
        s.h0 = 5.0;
        scenarios.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "complex-python";
        s.dockerfile = "FROM miniconda3\n"
                       "COPY . .\n"
                       "RUN conda install --file requirements.txt\n"
                       "CMD [\"python\", \"app.py\"]\n";
        std::string app;
        for (int i = 0; i < 60; ++i) {
            app += "def handler_" + std::to_string(i) + "(payload):\n    return payload\n";
        }
        s.project.put_file("app.py", app);
        s.project.put_file("util.py", "def helper(x):\n    return x * 2\n");
        s.project.put_file("requirements.txt", "numpy\npandas\nscipy\n");
        std::string appended = app;
        for (int i = 0; i < 1000; ++i) {
            appended += "value_" + std::to_string(i) + " = " + std::to_string(i) + "\n";
        }
        FileDelta d;
        d.path = "app.py";
        d.op = DeltaOp::Modify;
        d.entry.kind = EntryKind::File;
        d.entry.content.assign(appended.begin(), appended.end());
        s.change.push_back(std::move(d));
        s.interpreted = true;
        s.dep_layer_size = 32ull << 20;
        s.h0 = 5.0;
        scenarios.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "one-line-java";
        s.dockerfile = "FROM openjdk:8-jdk-alpine\n"
                       "COPY app.jar /opt/app.jar\n"
                       "CMD [\"java\", \"-jar\", \"/opt/app.jar\"]\n";
        FileTree jar_old = synthetic_tree(seed ^ 0x6a61725f, 256 << 10, "");
        FileTree jar_new = synthetic_tree(seed ^ 0x6a61726e, 256 << 10, "");
        s.project.entries["app.jar"] = jar_old.entries.begin()->second;
        FileDelta d;
        d.path = "app.jar";
        d.op = DeltaOp::Modify;
        d.entry = jar_new.entries.begin()->second; // recompiled outside the build
        s.change.push_back(std::move(d));
        s.interpreted = false;
        s.dep_layer_size = 0;
        s.h0 = 20.0;
        scenarios.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "complex-java";
        s.dockerfile = "FROM ubuntu:focal\n"
                       "RUN apt-get install -y openjdk-8-jdk\n"
                       "COPY . /src\n"
                       "RUN javac -d /out /src/Main.java\n"
                       "CMD [\"java\", \"-cp\", \"/out\", \"Main\"]\n";
        std::string source = "public class Main {\n";
        for (int i = 0; i < 200; ++i) {
            source += "    static int method_" + std::to_string(i) + "() { return " +
                      std::to_string(i) + "; }\n";
        }
        source += "}\n";
        s.project.put_file("Main.java", source);
        for (int f = 0; f < 7; ++f) {
            std::string body = "public class Helper" + std::to_string(f) + " {\n";
            for (int i = 0; i < 150; ++i) {
                body += "    static int helper_" + std::to_string(i) + "() { return " +
                        std::to_string(i) + "; }\n";
            }
            body += "}\n";
            s.project.put_file("Helper" + std::to_string(f) + ".java", body);
        }
        std::string appended = source;
        for (int i = 0; i < 1000; ++i) {
            appended += "// generated line " + std::to_string(i) + "\n";
        }
        FileDelta d;
        d.path = "Main.java";
        d.op = DeltaOp::Modify;
        d.entry.kind = EntryKind::File;
        d.entry.content.assign(appended.begin(), appended.end());
        s.change.push_back(std::move(d));
        s.interpreted = false;
        s.dep_layer_size = 8ull << 20; // javac output
        s.h0 = 1.5;
        scenarios.push_back(std::move(s));
    }

    return scenarios;
}

Scenario scenario_by_name(const std::string& name, std::uint64_t seed) {
    std::vector<Scenario> scenarios = default_scenarios(seed);
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (scenarios[i].name == name || std::to_string(i + 1) == name) {
            return scenarios[i];
        }
    }
    raise(Errc::UnknownScenario, name);
}

} // namespace layerpatch
