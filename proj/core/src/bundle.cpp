#include "layerpatch/bundle.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "layerpatch/errors.hpp"
#include "layerpatch/tar.hpp"

namespace layerpatch {

namespace {

using nlohmann::json;

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kRepositoriesName = "repositories";
constexpr const char* kVersionMarker = "1.0";

json parse_json(const std::string& text, const std::string& doc_path) {
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
        raise(Errc::MalformedJson, doc_path);
    }
    return parsed;
}

Digest digest_from_field(const std::string& value, const std::string& doc_path) {
    std::string_view hex = value;
    if (hex.starts_with("sha256:")) {
        hex.remove_prefix(7);
    }
    if (!Digest::is_valid_hex(hex)) {
        raise(Errc::MalformedJson, doc_path + ": bad digest \"" + value + "\"");
    }
    return Digest::from_hex(hex);
}

std::vector<ManifestEntry> parse_manifest(const std::string& raw) try {
    json doc = parse_json(raw, kManifestName);
    if (!doc.is_array() || doc.empty()) {
        raise(Errc::MalformedJson, std::string(kManifestName) + ": expected a non-empty array");
    }
    std::vector<ManifestEntry> entries;
    for (const json& item : doc) {
        ManifestEntry entry;
        if (!item.contains("Config") || !item.contains("Layers")) {
            raise(Errc::MalformedJson, std::string(kManifestName) + ": entry missing Config/Layers");
        }
        entry.config_path = item.at("Config").get<std::string>();
        if (!entry.config_path.ends_with(".json")) {
            raise(Errc::MalformedJson,
                  std::string(kManifestName) + ": Config must end in .json: " + entry.config_path);
        }
        if (item.contains("RepoTags") && item.at("RepoTags").is_array()) {
            for (const json& tag : item.at("RepoTags")) {
                entry.repo_tags.push_back(tag.get<std::string>());
            }
        }
        for (const json& layer : item.at("Layers")) {
            entry.layer_paths.push_back(layer.get<std::string>());
        }
        if (entry.layer_paths.empty()) {
            raise(Errc::MalformedJson, std::string(kManifestName) + ": empty Layers list");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
} catch (const json::exception& e) {
    raise(Errc::MalformedJson, std::string(kManifestName) + ": " + e.what());
}

ImageConfig parse_config(const std::string& raw, const std::string& doc_path) try {
    json doc = parse_json(raw, doc_path);
    ImageConfig config;
    config.raw = raw;
    config.architecture = doc.value("architecture", std::string());
    if (doc.contains("history")) {
        for (const json& item : doc.at("history")) {
            HistoryEntry entry;
            entry.created_by = item.value("created_by", std::string());
            entry.empty_layer = item.value("empty_layer", false);
            config.history.push_back(std::move(entry));
        }
    }
    if (doc.contains("rootfs") && doc.at("rootfs").contains("diff_ids")) {
        for (const json& item : doc.at("rootfs").at("diff_ids")) {
            config.diff_ids.push_back(digest_from_field(item.get<std::string>(), doc_path));
        }
    }
    std::size_t non_empty = 0;
    for (const HistoryEntry& entry : config.history) {
        if (!entry.empty_layer) {
            ++non_empty;
        }
    }
    if (non_empty != config.diff_ids.size()) {
        raise(Errc::MalformedJson, doc_path + ": " + std::to_string(non_empty) +
                                       " non-empty history entries vs " +
                                       std::to_string(config.diff_ids.size()) + " diff_ids");
    }
    return config;
} catch (const json::exception& e) {
    raise(Errc::MalformedJson, doc_path + ": " + e.what());
}

std::map<std::string, std::map<std::string, std::string>> parse_repositories(
    const std::string& raw) try {
    std::map<std::string, std::map<std::string, std::string>> repos;
    if (raw.empty()) {
        return repos;
    }
    json doc = parse_json(raw, kRepositoriesName);
    for (const auto& [repo, tags] : doc.items()) {
        for (const auto& [tag, layer_id] : tags.items()) {
            repos[repo][tag] = layer_id.get<std::string>();
        }
    }
    return repos;
} catch (const json::exception& e) {
    raise(Errc::MalformedJson, std::string(kRepositoriesName) + ": " + e.what());
}

struct RawBundleFiles {
    // bundle-relative path -> file bytes
    std::map<std::string, std::vector<std::uint8_t>> files;

    bool contains(const std::string& path) const {
        return files.count(path) != 0;
    }
    std::string text(const std::string& path) const {
        const auto& bytes = files.at(path);
        return std::string(bytes.begin(), bytes.end());
    }
};

ImageBundle assemble(RawBundleFiles&& raw) {
    if (!raw.contains(kManifestName)) {
        raise(Errc::MissingManifest, kManifestName);
    }

    ImageBundle bundle;
    bundle.manifest_raw = raw.text(kManifestName);
    bundle.manifest = parse_manifest(bundle.manifest_raw);
    if (raw.contains(kRepositoriesName)) {
        bundle.repositories_raw = raw.text(kRepositoriesName);
        bundle.repositories = parse_repositories(bundle.repositories_raw);
    }

    bundle.config_path = bundle.manifest.front().config_path;
    for (const ManifestEntry& entry : bundle.manifest) {
        if (!raw.contains(entry.config_path)) {
            raise(Errc::DanglingLayerPointer, entry.config_path);
        }
    }
    bundle.config = parse_config(raw.text(bundle.config_path), bundle.config_path);

    // Index every layer directory present, manifest-referenced or not.
    auto load_layer = [&](const std::string& id) {
        if (bundle.layers.count(id) != 0) {
            return;
        }
        LayerRecord record;
        record.id = id;
        std::string version_path = id + "/VERSION";
        std::string json_path = id + "/json";
        std::string tar_path = id + "/layer.tar";
        if (!raw.contains(version_path) || raw.text(version_path) != kVersionMarker) {
            raise(Errc::BadVersionMarker, id);
        }
        record.version = raw.text(version_path);
        if (!raw.contains(json_path)) {
            raise(Errc::MalformedJson, json_path + ": missing");
        }
        record.metadata_json = raw.text(json_path);
        parse_json(record.metadata_json, json_path);
        record.payload = std::move(raw.files.at(tar_path));
        record.payload_digest = sha256(record.payload);
        bundle.layers.emplace(id, std::move(record));
    };

    for (const ManifestEntry& entry : bundle.manifest) {
        for (const std::string& layer_path : entry.layer_paths) {
            std::string id = layer_id_from_path(layer_path);
            if (id.empty() || !raw.contains(layer_path)) {
                raise(Errc::DanglingLayerPointer, layer_path);
            }
            load_layer(id);
        }
    }
    for (const auto& [path, bytes] : raw.files) {
        std::string id = layer_id_from_path(path);
        if (!id.empty()) {
            load_layer(id);
        }
    }

    for (const std::string& layer_path : bundle.manifest.front().layer_paths) {
        bundle.layer_order.push_back(layer_id_from_path(layer_path));
    }
    if (bundle.layer_order.size() != bundle.config.diff_ids.size()) {
        raise(Errc::MalformedJson, bundle.config_path + ": " +
                                       std::to_string(bundle.layer_order.size()) +
                                       " layers vs " + std::to_string(bundle.config.diff_ids.size()) +
                                       " diff_ids");
    }
    return bundle;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::IoFailure, path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        raise(Errc::IoFailure, path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::IoFailure, path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        raise(Errc::IoFailure, path.string());
    }
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> to_bytes(std::string_view text) {
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

void snapshot_clean_state(ImageBundle& bundle) {
    bundle.clean_docs.clear();
    bundle.clean_payloads.clear();
    for (const auto& [path, doc] : std::as_const(bundle).documents()) {
        bundle.clean_docs[path] = *doc;
    }
    for (const auto& [id, record] : bundle.layers) {
        bundle.clean_payloads[id] = record.payload_digest;
    }
}

} // namespace

Digest LayerRecord::recorded_checksum() const try {
    json doc = parse_json(metadata_json, id + "/json");
    if (!doc.contains("checksum")) {
        raise(Errc::MalformedJson, id + "/json: no checksum field");
    }
    return digest_from_field(doc.at("checksum").get<std::string>(), id + "/json");
} catch (const json::exception& e) {
    raise(Errc::MalformedJson, id + "/json: " + e.what());
}

const LayerRecord& ImageBundle::layer_at(std::size_t index) const {
    if (index >= layer_order.size()) {
        raise(Errc::UnknownLayer, "layer index " + std::to_string(index));
    }
    return layers.at(layer_order[index]);
}

LayerRecord& ImageBundle::layer_at(std::size_t index) {
    return const_cast<LayerRecord&>(std::as_const(*this).layer_at(index));
}

const LayerRecord& ImageBundle::layer_by_id(const std::string& id) const {
    auto it = layers.find(id);
    if (it == layers.end()) {
        raise(Errc::UnknownLayer, id);
    }
    return it->second;
}

LayerRecord& ImageBundle::layer_by_id(const std::string& id) {
    return const_cast<LayerRecord&>(std::as_const(*this).layer_by_id(id));
}

std::vector<std::pair<std::string, std::string*>> ImageBundle::documents() {
    std::vector<std::pair<std::string, std::string*>> docs;
    docs.emplace_back(kManifestName, &manifest_raw);
    if (!repositories_raw.empty()) {
        docs.emplace_back(kRepositoriesName, &repositories_raw);
    }
    docs.emplace_back(config_path, &config.raw);
    for (auto& [id, record] : layers) {
        docs.emplace_back(id + "/json", &record.metadata_json);
    }
    return docs;
}

std::vector<std::pair<std::string, const std::string*>> ImageBundle::documents() const {
    std::vector<std::pair<std::string, const std::string*>> docs;
    for (const auto& [path, doc] : const_cast<ImageBundle*>(this)->documents()) {
        docs.emplace_back(path, doc);
    }
    return docs;
}

void ImageBundle::reindex() {
    manifest = parse_manifest(manifest_raw);
    config = parse_config(config.raw, config_path);
    repositories = parse_repositories(repositories_raw);
    layer_order.clear();
    for (const std::string& layer_path : manifest.front().layer_paths) {
        std::string id = layer_id_from_path(layer_path);
        if (id.empty() || layers.count(id) == 0) {
            raise(Errc::DanglingLayerPointer, layer_path);
        }
        layer_order.push_back(id);
    }
}

bool operator==(const ImageBundle& a, const ImageBundle& b) {
    return a.manifest_raw == b.manifest_raw && a.config_path == b.config_path &&
           a.config == b.config && a.repositories_raw == b.repositories_raw &&
           a.layers == b.layers && a.layer_order == b.layer_order;
}

ImageBundle load_bundle(const std::filesystem::path& archive_path) {
    std::vector<std::uint8_t> bytes = read_file(archive_path);
    TarArchive archive = TarArchive::parse(bytes);
    RawBundleFiles raw;
    for (TarMember& member : archive.members) {
        if (member.typeflag() == '5') {
            continue;
        }
        raw.files[member.normalized_path()] = std::move(member.content);
    }
    return assemble(std::move(raw));
}

std::filesystem::path save_bundle(const ImageBundle& bundle,
                                  const std::filesystem::path& out_path) {
    std::map<std::string, std::pair<std::vector<std::uint8_t>, bool>> members; // path -> (bytes, is_dir)
    members[kManifestName] = {to_bytes(bundle.manifest_raw), false};
    if (!bundle.repositories_raw.empty()) {
        members[kRepositoriesName] = {to_bytes(bundle.repositories_raw), false};
    }
    members[bundle.config_path] = {to_bytes(bundle.config.raw), false};
    for (const auto& [id, record] : bundle.layers) {
        members[id] = {{}, true};
        members[id + "/VERSION"] = {to_bytes(record.version), false};
        members[id + "/json"] = {to_bytes(record.metadata_json), false};
        members[id + "/layer.tar"] = {record.payload, false};
    }

    TarArchive archive;
    for (auto& [path, entry] : members) { // std::map iterates lexicographically
        if (entry.second) {
            archive.members.push_back(TarMember::make_dir(path));
        } else {
            archive.members.push_back(TarMember::make_file(path, entry.first));
        }
    }
    std::vector<std::uint8_t> bytes = archive.serialize();
    write_file(out_path, bytes);
    return out_path;
}

ImageBundle open_store(const std::filesystem::path& store_root) {
    if (!std::filesystem::is_directory(store_root)) {
        raise(Errc::NotADirectory, store_root.string());
    }
    if (!std::filesystem::exists(store_root / kManifestName)) {
        raise(Errc::MissingManifest, (store_root / kManifestName).string());
    }
    RawBundleFiles raw;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(store_root)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string rel = std::filesystem::relative(entry.path(), store_root).generic_string();
        raw.files[normalize_path(rel)] = read_file(entry.path());
    }
    ImageBundle bundle = assemble(std::move(raw));
    bundle.store_root = store_root;
    snapshot_clean_state(bundle);
    return bundle;
}

std::vector<std::string> flush_store(ImageBundle& bundle) {
    if (!bundle.store_root) {
        raise(Errc::NotADirectory, "bundle is not store-backed");
    }
    const std::filesystem::path& root = *bundle.store_root;
    std::vector<std::string> written;

    for (const auto& [id, record] : bundle.layers) {
        if (bundle.clean_payloads.count(id) == 0) {
            std::filesystem::create_directories(root / id);
        }
    }
    for (const auto& [path, doc] : bundle.documents()) {
        auto it = bundle.clean_docs.find(path);
        if (it != bundle.clean_docs.end() && it->second == *doc) {
            continue;
        }
        write_file(root / path, *doc);
        written.push_back(path);
    }
    for (const auto& [id, record] : bundle.layers) {
        auto it = bundle.clean_payloads.find(id);
        bool is_new = it == bundle.clean_payloads.end();
        if (!is_new && it->second == record.payload_digest) {
            continue;
        }
        write_file(root / id / "layer.tar", record.payload);
        written.push_back(id + "/layer.tar");
        if (is_new) {
            write_file(root / id / "VERSION", record.version);
            written.push_back(id + "/VERSION");
        }
    }
    snapshot_clean_state(bundle);
    std::sort(written.begin(), written.end());
    return written;
}

FileTree flatten(const ImageBundle& bundle, std::size_t upto) {
    if (upto >= bundle.layer_count()) {
        raise(Errc::UnknownLayer, "flatten upto " + std::to_string(upto) + " of " +
                                      std::to_string(bundle.layer_count()));
    }
    FileTree tree;
    for (std::size_t i = 0; i <= upto; ++i) {
        const LayerRecord& record = bundle.layer_at(i);
        try {
            apply_layer_to_tree(tree, record.payload);
        } catch (const Error& e) {
            raise(Errc::CorruptPayload, record.id + ": " + e.detail());
        }
    }
    return tree;
}

FileTree flatten_all(const ImageBundle& bundle) {
    return flatten(bundle, bundle.layer_count() - 1);
}

FileTree layer_tree(const LayerRecord& layer) {
    try {
        return tree_from_tar(layer.payload);
    } catch (const Error& e) {
        raise(Errc::CorruptPayload, layer.id + ": " + e.detail());
    }
}

std::string layer_id_from_path(std::string_view layer_path) {
    std::size_t slash = layer_path.find('/');
    if (slash == std::string_view::npos || layer_path.substr(slash + 1) != "layer.tar") {
        return {};
    }
    std::string_view id = layer_path.substr(0, slash);
    for (char c : id) {
        bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!hex) {
            return {};
        }
    }
    return std::string(id);
}

} // namespace layerpatch
