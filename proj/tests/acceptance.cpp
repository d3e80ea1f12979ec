// Acceptance suite: every release criterion, one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "layerpatch/bench.hpp"
#include "layerpatch/builder.hpp"
#include "layerpatch/bundle.hpp"
#include "layerpatch/digest.hpp"
#include "layerpatch/dockerfile.hpp"
#include "layerpatch/errors.hpp"
#include "layerpatch/injector.hpp"
#include "layerpatch/integrity.hpp"
#include "layerpatch/planner.hpp"
#include "layerpatch/tar.hpp"

#include "support/test_support.hpp"

using namespace layerpatch;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct FixtureProject {
    std::string name;
    std::string dockerfile;
    FileTree old_context;
    FileTree new_context;
};

std::string file_text(int lines, const std::string& stem) {
    std::string out;
    for (int i = 0; i < lines; ++i) {
        out += stem + " " + std::to_string(i) + "\n";
    }
    return out;
}

/// Three fixture projects: a one-file script, a multi-file project with a
/// 1000-line appended change, and a project that deletes a file.
std::vector<FixtureProject> fixture_projects() {
    std::vector<FixtureProject> fixtures;

    {
        FixtureProject f;
        f.name = "one-file-script";
        f.dockerfile = "FROM python:alpine\nCOPY . .\nCMD [\"python\", \"app.py\"]\n";
        f.old_context.put_file("app.py", "print(\"v1\")\n");
        f.new_context = f.old_context;
        f.new_context.put_file("app.py", "print(\"v1\")\nprint(\"v2\")\n");
        fixtures.push_back(std::move(f));
    }
    {
        FixtureProject f;
        f.name = "multi-file-append";
        f.dockerfile = "FROM python:alpine\n"
                       "COPY . .\n"
                       "RUN pip install -r requirements.txt\n"
                       "CMD [\"python\", \"app.py\"]\n";
        f.old_context.put_file("app.py", file_text(50, "# line"));
        f.old_context.put_file("util.py", file_text(30, "util = "));
        f.old_context.put_dir("pkg");
        f.old_context.put_file("pkg/mod.py", file_text(20, "mod ="));
        f.old_context.put_file("requirements.txt", "numpy\n");
        f.new_context = f.old_context;
        f.new_context.put_file("app.py", file_text(50, "# line") + file_text(1000, "appended ="));
        fixtures.push_back(std::move(f));
    }
    {
        FixtureProject f;
        f.name = "deletion";
        f.dockerfile = "FROM base\nCOPY . .\nRUN collect static\nCMD [\"serve\"]\n";
        f.old_context.put_file("keep.py", "keep = 1\n");
        f.old_context.put_file("doomed.py", "doomed = 1\n");
        f.old_context.put_file("conf.ini", "[app]\nmode=1\n");
        f.new_context = f.old_context;
        f.new_context.remove_subtree("doomed.py");
        fixtures.push_back(std::move(f));
    }
    return fixtures;
}

BuildOptions fixture_opts() {
    BuildOptions opts;
    opts.run_output = [](const Instruction&, std::size_t index) {
        return synthetic_tree(900 + index, 16 << 10);
    };
    return opts;
}

struct InjectedFixture {
    ImageBundle bundle;
    Digest old_digest;
    std::string old_layer_id;
    InjectionReceipt receipt;
    std::size_t layer_index = 0;
};

InjectedFixture inject_fixture(const FixtureProject& fixture) {
    DockerfileModel model = parse_dockerfile(fixture.dockerfile);
    InjectedFixture result;
    result.bundle = build_bundle(model, fixture.old_context, fixture_opts());

    RebuildPlan p = plan(model, model, result.bundle, fixture.new_context, true);
    LayerAlignment alignment = align_layers(model, result.bundle);
    std::size_t inject_at = p.actions.size();
    for (std::size_t i = 0; i < p.actions.size(); ++i) {
        if (p.actions[i].kind == ActionKind::Inject) {
            inject_at = i;
            break;
        }
    }
    if (inject_at == p.actions.size()) {
        raise(Errc::InvalidPlan, fixture.name + ": nothing to inject");
    }
    result.layer_index = *alignment.layer_of_instruction[inject_at];
    result.old_digest = result.bundle.layer_at(result.layer_index).payload_digest;
    result.old_layer_id = result.bundle.layer_at(result.layer_index).id;
    result.receipt = apply_changeset(result.bundle, result.layer_index,
                                     p.actions[inject_at].deltas, InjectMode::CloneFirst);
    return result;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
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

int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* bin = std::getenv("LAYERPATCH_BIN");
    if (bin == nullptr) {
        return -1;
    }
    std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return -1;
    }
    std::string captured;
    char buffer[4096];
    std::size_t got;
    while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        captured.append(buffer, got);
    }
    int status = pclose(pipe);
    if (output != nullptr) {
        *output = std::move(captured);
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_tree_to_directory(const FileTree& tree, const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    for (const auto& [path, entry] : tree.entries) {
        std::filesystem::path target = root / path;
        if (entry.kind == EntryKind::Dir) {
            std::filesystem::create_directories(target);
            continue;
        }
        std::filesystem::create_directories(target.parent_path());
        if (entry.kind == EntryKind::Symlink) {
            std::filesystem::create_symlink(
                std::string(entry.content.begin(), entry.content.end()), target);
            continue;
        }
        std::ofstream out(target, std::ios::binary);
        out.write(reinterpret_cast<const char*>(entry.content.data()),
                  static_cast<std::streamsize>(entry.content.size()));
    }
}

// ---------------------------------------------------------------- criteria

Check criterion_oracle_equivalence() {
    Check check;
    auto start = std::chrono::steady_clock::now();
    for (const FixtureProject& fixture : fixture_projects()) {
        DockerfileModel model = parse_dockerfile(fixture.dockerfile);
        InjectedFixture injected = inject_fixture(fixture);
        ImageBundle rebuilt = build_bundle(model, fixture.new_context, fixture_opts());
        bool equal = content_maps_equal(flatten_all(injected.bundle), flatten_all(rebuilt));
        check.require(equal, fixture.name + ": flatten(injected) != flatten(rebuilt)");
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s >= 60s");
    return check;
}

Check criterion_integrity_closure() {
    Check check;
    for (const FixtureProject& fixture : fixture_projects()) {
        support::TempDir dir;
        DockerfileModel model = parse_dockerfile(fixture.dockerfile);
        ImageBundle bundle = build_bundle(model, fixture.old_context, fixture_opts());
        LayerAlignment alignment = align_layers(model, bundle);

        // the digest the injection will retire: the first COPY layer's
        std::size_t copy_index = 0;
        for (std::size_t i = 0; i < model.instructions.size(); ++i) {
            if (model.instructions[i].keyword == "COPY") {
                copy_index = *alignment.layer_of_instruction[i];
                break;
            }
        }
        Digest pre_digest = bundle.layer_at(copy_index).payload_digest;

        save_bundle(bundle, dir.file("img.tar"));
        write_tree_to_directory(fixture.new_context, dir.file("ctx"));
        {
            std::ofstream out(dir.file("Dockerfile"));
            out << fixture.dockerfile;
        }

        std::string output;
        int rc = run_cli("inject --bundle " + dir.file("img.tar").string() + " --context " +
                             dir.file("ctx").string() + " --dockerfile-old " +
                             dir.file("Dockerfile").string() +
                             " --assume-interpreted --output " + dir.file("out.tar").string(),
                         &output);
        check.require(rc == 0, fixture.name + ": cmd_inject exit " + std::to_string(rc) + "\n" + output);
        if (rc != 0) {
            continue;
        }

        ImageBundle after = load_bundle(dir.file("out.tar"));
        check.require(all_ok(verify_integrity(after)), fixture.name + ": integrity not all-ok");
        for (const auto& [path, doc] : std::as_const(after).documents()) {
            check.require(doc->find(pre_digest.hex()) == std::string::npos,
                          fixture.name + ": stale digest still in " + path);
        }
    }
    return check;
}

Check criterion_clone_isolation() {
    Check check;
    for (const FixtureProject& fixture : fixture_projects()) {
        InjectedFixture injected = inject_fixture(fixture);
        const LayerRecord& original = injected.bundle.layer_by_id(injected.old_layer_id);
        check.require(sha256(original.payload) == injected.old_digest,
                      fixture.name + ": original payload bytes changed");
        check.require(injected.receipt.new_layer_id != injected.old_layer_id,
                      fixture.name + ": clone id equals original");
    }
    return check;
}

Check criterion_sha256() {
    Check check;
    check.require(sha256("").hex() ==
                      "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
                  "empty-string vector");
    check.require(sha256("abc").hex() ==
                      "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
                  "abc vector");
    check.require(sha256(std::string(1000000, 'a')).hex() ==
                      "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0",
                  "million-a vector");

    std::mt19937_64 rng(404);
    std::uniform_int_distribution<std::size_t> len(0, 10000);
    for (int i = 0; i < 1000; ++i) {
        std::vector<std::uint8_t> input = support::random_bytes(rng, len(rng));
        Digest mine = sha256(input);
        check.require(mine.hex() == support::openssl_sha256_hex(input),
                      "oracle mismatch at round " + std::to_string(i));
        check.require(sha256_padded_bit_length(input.size()) % 512 == 0,
                      "padding law broken at length " + std::to_string(input.size()));
        Sha256 hasher;
        hasher.update(input);
        hasher.finish();
        check.require(hasher.blocks_processed() * 512 == sha256_padded_bit_length(input.size()),
                      "padded length disagrees with blocks processed");
    }
    return check;
}

Check criterion_fall_through() {
    Check check;
    std::mt19937_64 rng(777);
    static const char* kRun[] = {"RUN alpha", "RUN beta", "RUN gamma"};
    static const char* kConfig[] = {"ENV A=1", "ENV B=2", "CMD [\"x\"]", "LABEL k=v"};

    std::size_t mutated_cases = 0;
    for (int round = 0; round < 520; ++round) {
        std::vector<std::string> lines = {"FROM base"};
        std::size_t before = rng() % 3;
        for (std::size_t i = 0; i < before; ++i) {
            lines.push_back(rng() % 2 == 0 ? kRun[rng() % 3] : kConfig[rng() % 4]);
        }
        lines.push_back("COPY . .");
        std::size_t after = rng() % 3;
        for (std::size_t i = 0; i < after; ++i) {
            lines.push_back(rng() % 2 == 0 ? kRun[rng() % 3] : kConfig[rng() % 4]);
        }
        std::string text;
        for (const std::string& line : lines) {
            text += line + "\n";
        }
        DockerfileModel old_model = parse_dockerfile(text);

        FileTree context;
        std::size_t files = 1 + rng() % 5;
        for (std::size_t i = 0; i < files; ++i) {
            context.put_file("f" + std::to_string(i) + ".py",
                             "content " + std::to_string(rng() % 1000) + "\n");
        }
        ImageBundle bundle = build_bundle(old_model, context);

        DockerfileModel new_model = old_model;
        FileTree new_context = context;
        bool mutated = false;
        switch (rng() % 6) {
        case 0: // no mutation
            break;
        case 1: { // alter a non-COPY instruction's text
            std::vector<std::size_t> candidates;
            for (std::size_t i = 1; i < new_model.instructions.size(); ++i) {
                if (new_model.instructions[i].keyword != "COPY") {
                    candidates.push_back(i);
                }
            }
            if (!candidates.empty()) {
                std::size_t pick = candidates[rng() % candidates.size()];
                new_model.instructions[pick].arguments += " MUTATED";
                mutated = true;
            }
            break;
        }
        case 2: // change a context file's bytes
            new_context.put_file("f0.py", "mutated " + std::to_string(rng() % 1000) + "!\n");
            mutated = true;
            break;
        case 3: // add a context file
            new_context.put_file("brand_new.py", "fresh\n");
            mutated = true;
            break;
        case 4: { // insert an instruction (anywhere after FROM, appending ok)
            std::size_t pos = 1 + rng() % new_model.instructions.size();
            Instruction extra = parse_dockerfile("ENV INSERTED=1").instructions[0];
            new_model.instructions.insert(new_model.instructions.begin() + pos, extra);
            mutated = true;
            break;
        }
        default: { // remove a non-trailing, non-FROM instruction
            // removing one of a run of identical instructions is a no-op to
            // the cache check, so only drop one that differs from its successor
            std::vector<std::size_t> candidates;
            for (std::size_t i = 1; i + 1 < new_model.instructions.size(); ++i) {
                if (new_model.instructions[i].text() != new_model.instructions[i + 1].text()) {
                    candidates.push_back(i);
                }
            }
            if (!candidates.empty()) {
                std::size_t pos = candidates[rng() % candidates.size()];
                new_model.instructions.erase(new_model.instructions.begin() + pos);
                mutated = true;
            }
            break;
        }
        }

        RebuildPlan p = plan(old_model, new_model, bundle, new_context, rng() % 2 == 0);

        // baseline must match UseCache* Rebuild*
        bool seen_rebuild = false;
        bool monotone = true;
        for (const LayerAction& action : p.baseline) {
            if (action.kind == ActionKind::Inject) {
                monotone = false;
            } else if (action.kind == ActionKind::Rebuild) {
                seen_rebuild = true;
            } else if (seen_rebuild) {
                monotone = false;
            }
        }
        check.require(monotone, "baseline not UseCache*Rebuild* at round " + std::to_string(round));
        check.require(p.all_use_cache() == !mutated,
                      "all-UseCache iff no mutation failed at round " + std::to_string(round) +
                          (mutated ? " (mutation missed)" : " (phantom invalidation)"));
        if (mutated) {
            ++mutated_cases;
        }
    }
    check.require(mutated_cases >= 300, "generator produced too few mutations");
    return check;
}

Check criterion_locality() {
    Check check;
    auto start = std::chrono::steady_clock::now();

    Scenario sweep;
    sweep.name = "locality";
    sweep.dockerfile = "FROM base\n"
                       "COPY . .\n"
                       "RUN install dependencies\n"
                       "CMD [\"python\", \"app.py\"]\n";
    std::string source = file_text(28, "# source line"); // ~1 KiB source layer
    sweep.project.put_file("app.py", source);
    FileDelta d;
    d.path = "app.py";
    d.op = DeltaOp::Modify;
    d.entry.kind = EntryKind::File;
    std::string updated = source + "print(\"one line\")\n";
    d.entry.content.assign(updated.begin(), updated.end());
    sweep.change.push_back(d);
    sweep.interpreted = true;

    std::vector<std::uint64_t> sizes = {1ull << 20, 10ull << 20, 100ull << 20};
    std::vector<double> inject_medians;
    std::vector<double> full_medians;
    for (std::uint64_t size : sizes) {
        sweep.dep_layer_size = size;
        std::vector<TrialSample> samples = run_scenario(sweep, 7, 4242);
        inject_medians.push_back(median(durations_of(samples, TrialMethod::Inject)));
        full_medians.push_back(median(durations_of(samples, TrialMethod::FullRebuild)));
    }

    double inject_spread = *std::max_element(inject_medians.begin(), inject_medians.end()) /
                           *std::min_element(inject_medians.begin(), inject_medians.end());
    double full_growth = full_medians.back() / full_medians.front();
    double advantage = full_medians.back() / inject_medians.back();

    std::ostringstream note;
    note << "inject spread " << inject_spread << "x, full growth " << full_growth
         << "x, advantage at 100MiB " << advantage << "x";
    check.require(inject_spread < 3.0, "inject wall time varies " + note.str());
    check.require(full_growth >= 10.0, "full rebuild grew only " + note.str());
    check.require(advantage >= 10.0, "inject advantage too small: " + note.str());

    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(elapsed < 300.0, "runtime " + std::to_string(elapsed) + "s >= 300s");
    if (check.ok) {
        check.detail = note.str();
    }
    return check;
}

Check criterion_scenario4() {
    Check check;
    Scenario s = scenario_by_name("complex-java", 99);
    std::vector<TrialSample> samples = run_scenario(s, 20, 99);
    std::vector<double> ratios = speedup_samples(samples);
    double mean = 0.0;
    for (double r : ratios) {
        mean += r;
    }
    mean /= static_cast<double>(ratios.size());
    std::ostringstream note;
    note << "mean speedup " << mean;
    check.require(mean >= 0.4 && mean <= 1.5, note.str() + " outside [0.4, 1.5]");
    if (check.ok) {
        check.detail = note.str();
    }
    return check;
}

Check criterion_hypothesis() {
    Check check;

    std::vector<double> balanced = {9.0, 10.0, 11.0, 10.0};
    HypothesisResult zero = hypothesis_test(balanced, 10.0);
    check.require(std::abs(zero.p - 0.5) <= 1e-12, "z=0 p != 0.5");
    check.require(!zero.reject, "z=0 rejected");

    std::vector<double> strong;
    for (int i = 0; i < 50; ++i) {
        strong.push_back(100.0);
        strong.push_back(120.0);
    }
    HypothesisResult derived = hypothesis_test(strong, 100.0);
    check.require(derived.p < 1e-15, "derived case p >= 1e-15");
    check.require(derived.reject, "derived case not rejected");

    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> value(0.1, 100.0);
    std::uniform_real_distribution<double> scale(0.001, 1000.0);
    for (int round = 0; round < 20; ++round) {
        std::vector<double> samples;
        std::size_t n = 3 + rng() % 30;
        for (std::size_t i = 0; i < n; ++i) {
            samples.push_back(value(rng));
        }
        double h0 = value(rng);
        double c = scale(rng);
        std::vector<double> scaled;
        for (double s : samples) {
            scaled.push_back(s * c);
        }
        HypothesisResult a = hypothesis_test(samples, h0);
        HypothesisResult b = hypothesis_test(scaled, h0 * c);
        check.require(std::abs(a.z - b.z) <= 1e-9 * std::max(1.0, std::abs(a.z)),
                      "z not scale invariant");
        check.require(std::abs(a.p - b.p) <= 1e-9 * std::max(1e-12, a.p),
                      "p not scale invariant");
    }
    return check;
}

Check criterion_round_trip() {
    Check check;
    std::mt19937_64 rng(31337);
    static const char* kConfig[] = {"ENV MODE=prod", "CMD [\"run\"]", "LABEL a=b",
                                    "ENTRYPOINT [\"init\"]", "WORKDIR /srv"};
    support::TempDir dir;
    for (int round = 0; round < 100; ++round) {
        std::string dockerfile = "FROM base:" + std::to_string(rng() % 500) + "\n";
        std::size_t extra = 1 + rng() % 5;
        for (std::size_t i = 0; i < extra; ++i) {
            switch (rng() % 4) {
            case 0:
                dockerfile += "COPY . .\n";
                break;
            case 1:
                dockerfile += "ADD src /srv\n";
                break;
            case 2:
                dockerfile += "RUN step " + std::to_string(rng() % 1000) + "\n";
                break;
            default:
                dockerfile += std::string(kConfig[rng() % 5]) + "\n";
                break;
            }
        }
        FileTree context;
        std::size_t files = 1 + rng() % 5;
        for (std::size_t i = 0; i < files; ++i) {
            std::vector<std::uint8_t> content = support::random_bytes(rng, rng() % 4000);
            TreeEntry entry;
            entry.content = std::move(content);
            entry.kind = EntryKind::File;
            context.entries["data_" + std::to_string(i)] = std::move(entry);
        }
        context.put_dir("src");
        context.put_file("src/mod.py", "m = " + std::to_string(rng() % 100) + "\n");

        std::uint64_t payload_seed = rng();
        BuildOptions opts;
        opts.run_output = [payload_seed](const Instruction&, std::size_t index) {
            return synthetic_tree(payload_seed + index, 1 + (payload_seed + index) % 5000);
        };
        ImageBundle bundle = build_bundle(parse_dockerfile(dockerfile), context, opts);

        save_bundle(bundle, dir.file("a.tar"));
        ImageBundle loaded = load_bundle(dir.file("a.tar"));
        check.require(loaded == bundle, "round " + std::to_string(round) + ": load(save) != self");

        save_bundle(loaded, dir.file("b.tar"));
        std::ifstream fa(dir.file("a.tar"), std::ios::binary);
        std::ifstream fb(dir.file("b.tar"), std::ios::binary);
        std::string bytes_a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string bytes_b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        check.require(bytes_a == bytes_b,
                      "round " + std::to_string(round) + ": second save not byte-identical");
    }
    return check;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. oracle equivalence (inject == full rebuild on 3 fixtures)", criterion_oracle_equivalence},
        {"2. integrity closure (cmd_inject leaves no stale digest)", criterion_integrity_closure},
        {"3. clone isolation (original payload digest untouched)", criterion_clone_isolation},
        {"4. sha-256 correctness (vectors, 1000 random, padding law)", criterion_sha256},
        {"5. fall-through law (520 randomized mutations)", criterion_fall_through},
        {"6. O(1) locality (1/10/100 MiB dependency layers)", criterion_locality},
        {"7. scenario-4 behavior (compile layer, speedup in [0.4, 1.5])", criterion_scenario4},
        {"8. hypothesis test (exact p at z=0, derived case, scale invariance)", criterion_hypothesis},
        {"9. round-trip determinism (100 random bundles)", criterion_round_trip},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        if (check.ok) {
            std::cout << "[PASS] " << criterion.name;
            if (!check.detail.empty()) {
                std::cout << " -- " << check.detail;
            }
            std::cout << "\n";
        } else {
            ++failures;
            std::cout << "[FAIL] " << criterion.name << " -- " << check.detail << "\n";
        }
        std::cout.flush();
    }
    if (failures == 0) {
        std::cout << "acceptance: all " << criteria.size() << " criteria passed\n";
    } else {
        std::cout << "acceptance: " << failures << " of " << criteria.size()
                  << " criteria FAILED\n";
    }
    return failures == 0 ? 0 : 1;
}
