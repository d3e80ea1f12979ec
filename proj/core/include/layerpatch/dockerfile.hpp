#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layerpatch/bundle.hpp"

namespace layerpatch {

/// Content layers carry files (ADD/COPY/RUN/FROM); configuration layers
/// record state only and stay empty (ENV/ENTRYPOINT/CMD/LABEL and friends).
enum class LayerKind {
    Content,
    Configuration,
};

struct Instruction {
    std::size_t line_no = 0;  // first source line, 1-based
    std::string keyword;      // uppercase token
    std::string arguments;    // raw argument text, continuations folded
    LayerKind kind = LayerKind::Configuration;
    bool recognized = true;   // false for keywords outside the known set

    std::string text() const {
        return arguments.empty() ? keyword : keyword + " " + arguments;
    }

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct DockerfileModel {
    std::vector<Instruction> instructions;
    std::string source_text;

    friend bool operator==(const DockerfileModel& a, const DockerfileModel& b) {
        return a.instructions == b.instructions;
    }
};

/// Per-instruction layer alignment. Content instructions (other than FROM)
/// map to layer_order indices; configuration instructions map to nothing.
/// FROM owns the base image's whole layer prefix [0, base_layer_count).
struct LayerAlignment {
    std::vector<std::optional<std::size_t>> layer_of_instruction;
    std::size_t base_layer_count = 0;
};

LayerKind classify(std::string_view keyword);

/// Parses Dockerfile text: comments and blank lines skipped, backslash
/// continuations folded, one Instruction per remaining logical line.
DockerfileModel parse_dockerfile(std::string_view text);

/// Canonical one-instruction-per-line rendering; parse(to_text(m)) == m.
std::string to_text(const DockerfileModel& model);

/// Aligns instructions with bundle layers via the config history: the model
/// corresponds to the trailing history entries, anything before them
/// belongs to the base image.
LayerAlignment align_layers(const DockerfileModel& model, const ImageBundle& bundle);

} // namespace layerpatch
