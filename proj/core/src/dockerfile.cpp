#include "layerpatch/dockerfile.hpp"

#include <algorithm>
#include <cctype>

#include "layerpatch/errors.hpp"

namespace layerpatch {

namespace {

const std::vector<std::string> kContentKeywords = {"ADD", "COPY", "RUN", "FROM"};
const std::vector<std::string> kConfigKeywords = {"ENV",     "ENTRYPOINT", "CMD",
                                                  "LABEL",   "WORKDIR",    "EXPOSE"};

bool is_keyword_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

LayerKind classify(std::string_view keyword) {
    for (const std::string& k : kContentKeywords) {
        if (keyword == k) {
            return LayerKind::Content;
        }
    }
    return LayerKind::Configuration;
}

DockerfileModel parse_dockerfile(std::string_view text) {
    DockerfileModel model;
    model.source_text.assign(text);

    std::vector<std::pair<std::size_t, std::string>> physical; // line_no, text
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        physical.emplace_back(line_no, std::string(text.substr(start, end - start)));
        if (end == text.size()) {
            break;
        }
        start = end + 1;
    }

    std::size_t from_count = 0;
    for (std::size_t i = 0; i < physical.size(); ++i) {
        std::string_view line = trim(physical[i].second);
        if (line.empty() || line.front() == '#') {
            continue;
        }

        std::size_t first_line = physical[i].first;
        std::string logical(line);
        while (logical.ends_with('\\') && i + 1 < physical.size()) {
            logical.pop_back();
            ++i;
            logical += std::string(trim(physical[i].second));
        }

        if (!is_keyword_char(logical.front())) {
            raise(Errc::UnparsableLine, "line " + std::to_string(first_line) + ": " + logical);
        }
        std::size_t klen = 0;
        while (klen < logical.size() && is_keyword_char(logical[klen])) {
            ++klen;
        }

        Instruction instr;
        instr.line_no = first_line;
        instr.keyword = logical.substr(0, klen);
        std::transform(instr.keyword.begin(), instr.keyword.end(), instr.keyword.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        instr.arguments = std::string(trim(std::string_view(logical).substr(klen)));
        instr.kind = classify(instr.keyword);
        instr.recognized =
            std::find(kContentKeywords.begin(), kContentKeywords.end(), instr.keyword) !=
                kContentKeywords.end() ||
            std::find(kConfigKeywords.begin(), kConfigKeywords.end(), instr.keyword) !=
                kConfigKeywords.end();

        if (instr.keyword == "FROM" && ++from_count > 1) {
            raise(Errc::MultiStageBuild,
                  "second FROM at line " + std::to_string(first_line) + "; multi-stage builds are not supported");
        }
        model.instructions.push_back(std::move(instr));
    }
    return model;
}

std::string to_text(const DockerfileModel& model) {
    std::string out;
    for (const Instruction& instr : model.instructions) {
        out += instr.text();
        out += '\n';
    }
    return out;
}

LayerAlignment align_layers(const DockerfileModel& model, const ImageBundle& bundle) {
    const std::vector<HistoryEntry>& history = bundle.config.history;

    // FROM stands for the base image's history, so it does not consume one
    // of the trailing entries this Dockerfile contributed.
    std::vector<std::size_t> own; // indices of non-FROM instructions
    for (std::size_t i = 0; i < model.instructions.size(); ++i) {
        if (model.instructions[i].keyword != "FROM") {
            own.push_back(i);
        }
    }
    if (own.size() > history.size()) {
        raise(Errc::AlignmentMismatch, std::to_string(own.size()) + " instructions vs " +
                                           std::to_string(history.size()) + " history entries");
    }
    std::size_t base_history = history.size() - own.size();

    // layer index = count of non-empty history entries before this one
    std::vector<std::optional<std::size_t>> layer_of_history(history.size());
    std::size_t next_layer = 0;
    for (std::size_t h = 0; h < history.size(); ++h) {
        if (!history[h].empty_layer) {
            layer_of_history[h] = next_layer++;
        }
    }
    if (next_layer != bundle.layer_count()) {
        raise(Errc::AlignmentMismatch,
              "config history describes " + std::to_string(next_layer) + " layers, bundle has " +
                  std::to_string(bundle.layer_count()));
    }

    LayerAlignment alignment;
    alignment.layer_of_instruction.assign(model.instructions.size(), std::nullopt);
    std::size_t base_layers = 0;
    for (std::size_t h = 0; h < base_history; ++h) {
        if (!history[h].empty_layer) {
            ++base_layers;
        }
    }
    alignment.base_layer_count = base_layers;

    for (std::size_t k = 0; k < own.size(); ++k) {
        std::size_t instr_idx = own[k];
        std::size_t hist_idx = base_history + k;
        const Instruction& instr = model.instructions[instr_idx];
        bool expect_content = instr.kind == LayerKind::Content;
        if (expect_content == history[hist_idx].empty_layer) {
            raise(Errc::AlignmentMismatch,
                  instr.keyword + " at line " + std::to_string(instr.line_no) +
                      " does not match history entry " + std::to_string(hist_idx));
        }
        if (expect_content) {
            alignment.layer_of_instruction[instr_idx] = layer_of_history[hist_idx];
        }
    }
    return alignment;
}

} // namespace layerpatch
