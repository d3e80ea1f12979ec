#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "layerpatch/bundle.hpp"
#include "layerpatch/dockerfile.hpp"
#include "layerpatch/file_tree.hpp"
#include "layerpatch/planner.hpp"

namespace layerpatch {

/// Controls bundle construction. RUN instructions cannot actually execute,
/// so `run_output` supplies the tree a command is considered to produce
/// (index = instruction position in the model).
struct BuildOptions {
    std::string repo_tag = "demo:latest";
    std::string architecture = "amd64";
    FileTree base_tree; // FROM layer payload; default_base_tree() when empty
    std::function<FileTree(const Instruction&, std::size_t)> run_output;
};

/// Builds a complete bundle the way a from-scratch image build would:
/// one layer per content instruction (FROM contributes the base layer),
/// an empty-layer history entry per configuration instruction, metadata
/// checksums over the payload bytes.
ImageBundle build_bundle(const DockerfileModel& model, const FileTree& context,
                         const BuildOptions& opts = {});

/// Re-creates one content layer from `new_tree` under a fresh identity and
/// repoints every document reference, the way a cache-miss rebuild of that
/// instruction would. Identical payload bytes keep the existing layer.
void rebuild_layer(ImageBundle& bundle, std::size_t layer_index, const FileTree& new_tree);

/// Small fixed tree standing in for a base image's filesystem.
FileTree default_base_tree();

/// Deterministic pseudorandom payload tree of roughly `total_bytes` content
/// bytes under `prefix`.
FileTree synthetic_tree(std::uint64_t seed, std::uint64_t total_bytes,
                        const std::string& prefix = "opt/deps");

} // namespace layerpatch
