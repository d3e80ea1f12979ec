#pragma once

#include <string>
#include <vector>

#include "layerpatch/bundle.hpp"
#include "layerpatch/dockerfile.hpp"
#include "layerpatch/file_tree.hpp"

namespace layerpatch {

enum class DeltaOp {
    Add,
    Modify,
    Delete,
};

struct FileDelta {
    std::string path;
    DeltaOp op = DeltaOp::Modify;
    TreeEntry entry; // Add/Modify: the new entry; unused for Delete

    friend bool operator==(const FileDelta&, const FileDelta&) = default;
};

enum class ChangeType {
    ContentChange,
    ConfigChange,
};

enum class ActionKind {
    UseCache,
    Inject,
    Rebuild,
};

struct LayerAction {
    ActionKind kind = ActionKind::UseCache;
    std::vector<FileDelta> deltas; // Inject only, never empty
    std::string reason;            // Rebuild only

    static LayerAction use_cache();
    static LayerAction inject(std::vector<FileDelta> deltas);
    static LayerAction rebuild(std::string reason);
};

/// Per-instruction plan. `baseline` models stock layer caching (UseCache
/// until the first invalidated instruction, Rebuild from there on);
/// `actions` is the injection plan for the same edit.
struct RebuildPlan {
    std::vector<LayerAction> actions;
    std::vector<LayerAction> baseline;
    bool interpreted_mode = false;

    bool all_use_cache() const;
    std::size_t inject_count() const;
};

enum class DlcOutcome {
    UseCache,
    Invalidate,
};

/// Content-digest diff, sorted by path. Modes and timestamps never enter
/// the comparison.
std::vector<FileDelta> diff_tree(const FileTree& old_tree, const FileTree& new_tree);

/// Layer-cache decision for one instruction pair: ADD/COPY invalidate on
/// context content changes, everything else on literal text changes.
DlcOutcome dlc_decision(const Instruction& old_instr, const Instruction& new_instr,
                        const FileTree* old_files, const FileTree* new_files);

/// Materializes "COPY <src> <dst>" against a context tree. Literal paths
/// only; "." means the whole context; glob patterns are rejected.
FileTree resolve_copy(const std::string& arguments, const FileTree& context);

RebuildPlan plan(const DockerfileModel& old_df, const DockerfileModel& new_df,
                 const ImageBundle& bundle, const FileTree& context, bool interpreted_mode);

ChangeType classify_change(std::size_t action_index, const RebuildPlan& plan,
                           const DockerfileModel& model);

/// True when the two trees agree on path -> (kind, content); modes ignored.
bool content_maps_equal(const FileTree& a, const FileTree& b);

} // namespace layerpatch
