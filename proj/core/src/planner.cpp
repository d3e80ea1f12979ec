#include "layerpatch/planner.hpp"

#include <algorithm>
#include <sstream>

#include "layerpatch/errors.hpp"

namespace layerpatch {

namespace {

bool is_copy_like(const Instruction& instr) {
    return instr.keyword == "ADD" || instr.keyword == "COPY";
}

std::vector<std::string> split_tokens(const std::string& arguments) {
    std::vector<std::string> tokens;
    std::istringstream in(arguments);
    std::string token;
    while (in >> token) {
        tokens.push_back(token);
    }
    return tokens;
}

bool entry_content_equal(const TreeEntry& a, const TreeEntry& b) {
    return a.kind == b.kind && a.content == b.content;
}

std::string basename_of(const std::string& path) {
    std::size_t slash = path.rfind('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string join_under(const std::string& dst, const std::string& rel) {
    return dst.empty() ? rel : dst + "/" + rel;
}

} // namespace

LayerAction LayerAction::use_cache() {
    return LayerAction{};
}

LayerAction LayerAction::inject(std::vector<FileDelta> deltas) {
    if (deltas.empty()) {
        raise(Errc::InvalidPlan, "Inject actions carry a non-empty delta list");
    }
    LayerAction action;
    action.kind = ActionKind::Inject;
    action.deltas = std::move(deltas);
    return action;
}

LayerAction LayerAction::rebuild(std::string reason) {
    LayerAction action;
    action.kind = ActionKind::Rebuild;
    action.reason = std::move(reason);
    return action;
}

bool RebuildPlan::all_use_cache() const {
    return std::all_of(actions.begin(), actions.end(),
                       [](const LayerAction& a) { return a.kind == ActionKind::UseCache; }) &&
           std::all_of(baseline.begin(), baseline.end(),
                       [](const LayerAction& a) { return a.kind == ActionKind::UseCache; });
}

std::size_t RebuildPlan::inject_count() const {
    return static_cast<std::size_t>(std::count_if(
        actions.begin(), actions.end(),
        [](const LayerAction& a) { return a.kind == ActionKind::Inject; }));
}

std::vector<FileDelta> diff_tree(const FileTree& old_tree, const FileTree& new_tree) {
    std::vector<FileDelta> deltas;
    auto old_it = old_tree.entries.begin();
    auto new_it = new_tree.entries.begin();
    while (old_it != old_tree.entries.end() || new_it != new_tree.entries.end()) {
        if (new_it == new_tree.entries.end() ||
            (old_it != old_tree.entries.end() && old_it->first < new_it->first)) {
            FileDelta d;
            d.path = old_it->first;
            d.op = DeltaOp::Delete;
            deltas.push_back(std::move(d));
            ++old_it;
        } else if (old_it == old_tree.entries.end() || new_it->first < old_it->first) {
            FileDelta d;
            d.path = new_it->first;
            d.op = DeltaOp::Add;
            d.entry = new_it->second;
            deltas.push_back(std::move(d));
            ++new_it;
        } else {
            if (!entry_content_equal(old_it->second, new_it->second)) {
                FileDelta d;
                d.path = new_it->first;
                d.op = DeltaOp::Modify;
                d.entry = new_it->second;
                deltas.push_back(std::move(d));
            }
            ++old_it;
            ++new_it;
        }
    }
    return deltas; // map walk keeps them sorted by path
}

DlcOutcome dlc_decision(const Instruction& old_instr, const Instruction& new_instr,
                        const FileTree* old_files, const FileTree* new_files) {
    if (is_copy_like(old_instr) || is_copy_like(new_instr)) {
        if (old_files == nullptr || new_files == nullptr) {
            raise(Errc::MissingContext,
                  old_instr.keyword + " at line " + std::to_string(old_instr.line_no) +
                      " requires both file trees");
        }
    }
    if (old_instr.text() != new_instr.text()) {
        return DlcOutcome::Invalidate; // instruction altered
    }
    if (is_copy_like(old_instr)) {
        return diff_tree(*old_files, *new_files).empty() ? DlcOutcome::UseCache
                                                         : DlcOutcome::Invalidate;
    }
    return DlcOutcome::UseCache; // literal text matched
}

FileTree resolve_copy(const std::string& arguments, const FileTree& context) {
    std::vector<std::string> tokens = split_tokens(arguments);
    if (tokens.size() != 2) {
        raise(Errc::UnsupportedCopySpec, "expected \"<src> <dst>\", got \"" + arguments + "\"");
    }
    for (const std::string& token : tokens) {
        if (token.find_first_of("*?[") != std::string::npos) {
            raise(Errc::UnsupportedCopySpec, "glob patterns are not supported: " + token);
        }
    }
    std::string src = normalize_path(tokens[0]);
    std::string dst = normalize_path(tokens[1]);

    FileTree out;
    if (src.empty()) { // "." or "/": the whole context
        for (const auto& [path, entry] : context.entries) {
            out.entries[join_under(dst, path)] = entry;
        }
        return out;
    }

    auto exact = context.entries.find(src);
    if (exact != context.entries.end() && exact->second.kind != EntryKind::Dir) {
        bool dst_is_dir = dst.empty() || tokens[1].ends_with('/');
        std::string target = dst_is_dir ? join_under(dst, basename_of(src)) : dst;
        out.entries[target] = exact->second;
        return out;
    }

    std::string prefix = src + "/";
    bool found = exact != context.entries.end();
    for (auto it = context.entries.lower_bound(prefix);
         it != context.entries.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
        out.entries[join_under(dst, it->first.substr(prefix.size()))] = it->second;
        found = true;
    }
    if (!found) {
        raise(Errc::MissingContext, "context has no \"" + src + "\"");
    }
    return out;
}

RebuildPlan plan(const DockerfileModel& old_df, const DockerfileModel& new_df,
                 const ImageBundle& bundle, const FileTree& context, bool interpreted_mode) {
    LayerAlignment alignment = align_layers(old_df, bundle);

    std::size_t n_new = new_df.instructions.size();
    std::size_t n_old = old_df.instructions.size();

    // First index where the instruction sequences stop having the same
    // shape; argument edits are not structural, keyword edits are.
    std::size_t structural_div = n_new;
    for (std::size_t i = 0; i < n_new; ++i) {
        if (i >= n_old || old_df.instructions[i].keyword != new_df.instructions[i].keyword) {
            structural_div = i;
            break;
        }
    }
    bool structurally_equal = n_old == n_new && structural_div == n_new;

    std::vector<DlcOutcome> outcomes(n_new, DlcOutcome::UseCache);
    std::vector<std::vector<FileDelta>> copy_deltas(n_new);
    std::size_t first_invalid = n_new;

    for (std::size_t i = 0; i < structural_div; ++i) {
        const Instruction& old_instr = old_df.instructions[i];
        const Instruction& new_instr = new_df.instructions[i];
        if (is_copy_like(old_instr)) {
            FileTree old_tree = layer_tree(bundle.layer_at(*alignment.layer_of_instruction[i]));
            FileTree new_tree = resolve_copy(new_instr.arguments, context);
            outcomes[i] = dlc_decision(old_instr, new_instr, &old_tree, &new_tree);
            if (outcomes[i] == DlcOutcome::Invalidate) {
                copy_deltas[i] = diff_tree(old_tree, new_tree);
            }
        } else {
            outcomes[i] = dlc_decision(old_instr, new_instr, nullptr, nullptr);
        }
        if (outcomes[i] == DlcOutcome::Invalidate && first_invalid == n_new) {
            first_invalid = i;
        }
    }
    if (!structurally_equal) {
        first_invalid = std::min(first_invalid, structural_div);
    }

    RebuildPlan result;
    result.interpreted_mode = interpreted_mode;
    result.baseline.reserve(n_new);
    for (std::size_t i = 0; i < n_new; ++i) {
        if (i < first_invalid) {
            result.baseline.push_back(LayerAction::use_cache());
        } else if (i == first_invalid) {
            result.baseline.push_back(LayerAction::rebuild("invalidated"));
        } else {
            result.baseline.push_back(LayerAction::rebuild("fall-through"));
        }
    }

    result.actions.reserve(n_new);
    for (std::size_t i = 0; i < n_new; ++i) {
        if (!structurally_equal && i >= structural_div) {
            result.actions.push_back(LayerAction::rebuild("structural Dockerfile change"));
            continue;
        }
        if (outcomes[i] != DlcOutcome::Invalidate) {
            result.actions.push_back(LayerAction::use_cache());
            continue;
        }
        const Instruction& instr = new_df.instructions[i];
        if (is_copy_like(instr)) {
            if (copy_deltas[i].empty()) {
                result.actions.push_back(
                    LayerAction::rebuild("instruction text changed, contents identical"));
            } else {
                result.actions.push_back(LayerAction::inject(std::move(copy_deltas[i])));
            }
        } else if (instr.kind == LayerKind::Content) {
            result.actions.push_back(LayerAction::rebuild(instr.keyword + " changed - delegate to Docker"));
        } else {
            result.actions.push_back(LayerAction::rebuild("config - delegate to Docker"));
        }
    }

    // Without the interpreted-language guarantee, a cached RUN after an
    // injected layer cannot be trusted: its inputs changed underneath it.
    if (!interpreted_mode) {
        std::size_t first_inject = n_new;
        for (std::size_t i = 0; i < n_new; ++i) {
            if (result.actions[i].kind == ActionKind::Inject) {
                first_inject = i;
                break;
            }
        }
        for (std::size_t i = first_inject + 1; i < n_new && first_inject < n_new; ++i) {
            if (new_df.instructions[i].keyword == "RUN" &&
                result.actions[i].kind == ActionKind::UseCache) {
                result.actions[i] =
                    LayerAction::rebuild("RUN after injection - interpreted mode off");
            }
        }
    }

    if (result.inject_count() > 1) {
        raise(Errc::MultiContentChange,
              std::to_string(result.inject_count()) + " layers need injection; one is supported");
    }
    return result;
}

ChangeType classify_change(std::size_t action_index, const RebuildPlan& plan,
                           const DockerfileModel& model) {
    if (action_index >= plan.actions.size() || action_index >= model.instructions.size()) {
        raise(Errc::InvalidPlan, "action index " + std::to_string(action_index) + " out of range");
    }
    if (plan.actions[action_index].kind == ActionKind::UseCache) {
        raise(Errc::NotInvalidated, "instruction " + std::to_string(action_index) + " is cached");
    }
    const Instruction& instr = model.instructions[action_index];
    if (instr.kind == LayerKind::Content) {
        return ChangeType::ContentChange;
    }
    return ChangeType::ConfigChange;
}

bool content_maps_equal(const FileTree& a, const FileTree& b) {
    if (a.entries.size() != b.entries.size()) {
        return false;
    }
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    for (; ia != a.entries.end(); ++ia, ++ib) {
        if (ia->first != ib->first || !entry_content_equal(ia->second, ib->second)) {
            return false;
        }
    }
    return true;
}

} // namespace layerpatch
