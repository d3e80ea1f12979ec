#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layerpatch/builder.hpp"
#include "layerpatch/file_tree.hpp"
#include "layerpatch/injector.hpp"
#include "layerpatch/planner.hpp"

namespace layerpatch {

enum class TrialMethod {
    FullRebuild,
    Inject,
};

struct TrialSample {
    TrialMethod method = TrialMethod::FullRebuild;
    double duration_s = 0.0; // monotonic clock
};

/// One measured workload: a Dockerfile, a project tree, an edit, and the
/// size of the synthetic dependency layer rebuilt on fall-through (the
/// first RUN after the first COPY).
struct Scenario {
    std::string name;
    std::string dockerfile;
    FileTree project;
    std::vector<FileDelta> change;
    bool interpreted = true;
    std::uint64_t dep_layer_size = 0;
    double h0 = 1.0; // hypothesized mean speedup floor for the report
};

struct HypothesisResult {
    double h0 = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
    double z = 0.0;
    double p = 1.0;
    bool reject = false; // at significance 0.001
};

struct MethodStats {
    double mean_s = 0.0;
    double std_s = 0.0;
    std::size_t n = 0;
};

struct ScenarioResult {
    std::string name;
    double h0 = 1.0;
    std::vector<TrialSample> samples;
};

/// Per-step cost a simulated image build pays for every layer it has to
/// re-create; models the fixed per-instruction overhead of a real builder.
constexpr double kDefaultStepDelayMs = 2.0;

/// Runs `trials` paired measurements. Each trial builds the fixture bundle,
/// times a simulated full rebuild of everything the baseline plan
/// invalidates, then times plan + apply_changeset on a fresh copy (plus the
/// re-creation of any layer the injection plan still marks Rebuild, as with
/// compile layers outside interpreted mode).
std::vector<TrialSample> run_scenario(const Scenario& scenario, std::size_t trials,
                                      std::uint64_t seed,
                                      double step_delay_ms = kDefaultStepDelayMs);

/// Pairwise FullRebuild/Inject ratios by trial index.
std::vector<double> speedup_samples(const std::vector<TrialSample>& samples);

/// Upper-tail Z test of the null hypothesis "mean <= h0":
/// z = (mean - h0) / (s / sqrt(n)), p = 1 - Phi(z), reject iff p < 0.001.
HypothesisResult hypothesis_test(const std::vector<double>& samples, double h0);

MethodStats method_stats(const std::vector<TrialSample>& samples, TrialMethod method);

/// JSON report: one block per scenario with per-method stats, the speedup
/// distribution, and the hypothesis test, plus machine metadata.
std::string report_json(const std::vector<ScenarioResult>& results);

/// Plain-text table over the same data.
std::string report_table(const std::vector<ScenarioResult>& results);

/// The four stock scenarios, smallest to most complex; synthetic payloads
/// derive from `seed`.
std::vector<Scenario> default_scenarios(std::uint64_t seed);

/// Accepts "1".."4" or a scenario name.
Scenario scenario_by_name(const std::string& name, std::uint64_t seed);

} // namespace layerpatch
