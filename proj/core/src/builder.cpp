#include "layerpatch/builder.hpp"

#include <cstdio>
#include <cstring>
#include <random>

#include <nlohmann/json.hpp>

#include "layerpatch/digest.hpp"
#include "layerpatch/errors.hpp"
#include "layerpatch/integrity.hpp"
#include "layerpatch/tar.hpp"

namespace layerpatch {

namespace {

using nlohmann::json;

std::string layer_metadata_doc(const std::string& id, const std::string& parent,
                               const Digest& checksum) {
    json doc;
    doc["checksum"] = "sha256:" + checksum.hex();
    doc["id"] = id;
    if (!parent.empty()) {
        doc["parent"] = parent;
    }
    return doc.dump();
}

std::string derive_layer_id(const std::string& parent, const Digest& diff_digest,
                            const std::string& created_by) {
    return sha256(parent + ":" + diff_digest.hex() + ":" + created_by).hex();
}

} // namespace

ImageBundle build_bundle(const DockerfileModel& model, const FileTree& context,
                         const BuildOptions& opts) {
    ImageBundle bundle;
    json history = json::array();
    json diff_ids = json::array();
    std::string parent;

    for (std::size_t i = 0; i < model.instructions.size(); ++i) {
        const Instruction& instr = model.instructions[i];
        bool content = instr.kind == LayerKind::Content;
        history.push_back({{"created_by", instr.text()}, {"empty_layer", !content}});
        if (!content) {
            continue;
        }

        FileTree tree;
        if (instr.keyword == "FROM") {
            tree = opts.base_tree.entries.empty() ? default_base_tree() : opts.base_tree;
        } else if (instr.keyword == "COPY" || instr.keyword == "ADD") {
            tree = resolve_copy(instr.arguments, context);
        } else { // RUN
            if (opts.run_output) {
                tree = opts.run_output(instr, i);
            }
        }

        LayerRecord record;
        record.payload = tar_from_tree(tree);
        record.payload_digest = sha256(record.payload);
        record.id = derive_layer_id(parent, record.payload_digest, instr.text());
        record.version = "1.0";
        record.metadata_json = layer_metadata_doc(record.id, parent, record.payload_digest);
        diff_ids.push_back("sha256:" + record.payload_digest.hex());
        bundle.layer_order.push_back(record.id);
        parent = record.id;
        bundle.layers.emplace(record.id, std::move(record));
    }

    json config;
    config["architecture"] = opts.architecture;
    config["history"] = std::move(history);
    config["rootfs"] = {{"diff_ids", std::move(diff_ids)}, {"type", "layers"}};
    std::string config_raw = config.dump();
    bundle.config_path = sha256(config_raw).hex() + ".json";

    json layer_paths = json::array();
    for (const std::string& id : bundle.layer_order) {
        layer_paths.push_back(id + "/layer.tar");
    }
    json manifest = json::array();
    manifest.push_back({{"Config", bundle.config_path},
                        {"Layers", std::move(layer_paths)},
                        {"RepoTags", json::array({opts.repo_tag})}});
    bundle.manifest_raw = manifest.dump();

    std::string repo = opts.repo_tag;
    std::string tag = "latest";
    if (std::size_t colon = repo.rfind(':'); colon != std::string::npos) {
        tag = repo.substr(colon + 1);
        repo = repo.substr(0, colon);
    }
    json repositories;
    repositories[repo][tag] = bundle.layer_order.empty() ? "" : bundle.layer_order.back();
    bundle.repositories_raw = repositories.dump();

    bundle.config.raw = config_raw;
    bundle.reindex();
    return bundle;
}

void rebuild_layer(ImageBundle& bundle, std::size_t layer_index, const FileTree& new_tree) {
    const LayerRecord& old_record = bundle.layer_at(layer_index);
    const std::string old_id = old_record.id;
    const Digest old_digest = old_record.payload_digest;

    std::vector<std::uint8_t> payload = tar_from_tree(new_tree);
    Digest new_digest = sha256(payload);
    if (new_digest == old_digest) {
        return; // same bytes, same layer
    }

    LayerRecord record;
    record.id = derive_layer_id(old_id, new_digest, "rebuild");
    record.version = "1.0";
    record.payload = std::move(payload);
    record.payload_digest = new_digest;
    record.metadata_json = old_record.metadata_json;
    replace_hex_token(record.metadata_json, old_id, record.id);

    std::string new_id = record.id;
    bundle.layers.erase(old_id);
    bundle.layers.emplace(new_id, std::move(record));
    for (auto& [path, doc] : bundle.documents()) {
        replace_hex_token(*doc, old_id, new_id);
    }
    bundle.reindex();
    rewrite_digest(bundle, old_digest, new_digest);
}

FileTree default_base_tree() {
    FileTree tree;
    tree.put_dir("bin");
    tree.put_file("bin/sh", "#!/bin/sh\nexec busybox sh \"$@\"\n", 0755);
    tree.put_dir("etc");
    tree.put_file("etc/os-release", "NAME=\"fixture\"\nID=fixture\nVERSION_ID=\"1\"\n");
    tree.put_dir("usr");
    tree.put_dir("usr/lib");
    tree.put_file("usr/lib/libruntime.so", std::string(2048, '\0'), 0755);
    return tree;
}

FileTree synthetic_tree(std::uint64_t seed, std::uint64_t total_bytes, const std::string& prefix) {
    FileTree tree;
    if (!prefix.empty()) {
        tree.put_dir(prefix);
    }
    std::mt19937_64 rng(seed);
    constexpr std::uint64_t kChunk = 1 << 20;
    std::uint64_t remaining = total_bytes;
    std::size_t index = 0;
    while (remaining > 0) {
        std::uint64_t size = std::min(remaining, kChunk);
        std::vector<std::uint8_t> bytes(size);
        std::size_t i = 0;
        for (; i + 8 <= bytes.size(); i += 8) {
            std::uint64_t word = rng();
            std::memcpy(bytes.data() + i, &word, 8);
        }
        for (std::uint64_t word = rng(); i < bytes.size(); ++i, word >>= 8) {
            bytes[i] = static_cast<std::uint8_t>(word);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "blob_%04zu.bin", index++);
        TreeEntry entry;
        entry.content = std::move(bytes);
        entry.kind = EntryKind::File;
        tree.entries[prefix.empty() ? name : prefix + "/" + name] = std::move(entry);
        remaining -= size;
    }
    return tree;
}

} // namespace layerpatch
