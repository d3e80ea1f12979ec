#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerpatch/digest.hpp"
#include "layerpatch/file_tree.hpp"

namespace layerpatch {

struct ManifestEntry {
    std::string config_path;              // relative, ends in ".json"
    std::vector<std::string> repo_tags;   // "name:tag"
    std::vector<std::string> layer_paths; // "<id>/layer.tar", base first

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct HistoryEntry {
    std::string created_by;
    bool empty_layer = false;

    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct ImageConfig {
    std::string architecture;
    std::vector<HistoryEntry> history;
    std::vector<Digest> diff_ids; // one per non-empty history entry
    std::string raw;              // full document, byte-preserved

    friend bool operator==(const ImageConfig&, const ImageConfig&) = default;
};

struct LayerRecord {
    std::string id;            // hex directory name
    std::string version;       // contents of VERSION, must be "1.0"
    std::string metadata_json; // raw bytes of the layer json document
    std::vector<std::uint8_t> payload; // uncompressed tar
    Digest payload_digest;             // sha256(payload)

    /// Checksum recorded in the metadata document.
    Digest recorded_checksum() const;

    friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

/// In-memory model of an exported image archive: manifest, config,
/// repositories, and every layer directory found in the archive (including
/// ones no manifest entry points at).
struct ImageBundle {
    std::vector<ManifestEntry> manifest;
    std::string manifest_raw;

    ImageConfig config;
    std::string config_path;

    std::map<std::string, std::map<std::string, std::string>> repositories;
    std::string repositories_raw; // empty when the document is absent

    std::map<std::string, LayerRecord> layers; // id -> record
    std::vector<std::string> layer_order;      // manifest order, base first

    // Implicit (store-backed) mode: set by open_store; flush_store writes
    // only artifacts whose bytes changed since load.
    std::optional<std::filesystem::path> store_root;
    std::map<std::string, std::string> clean_docs;
    std::map<std::string, Digest> clean_payloads;

    std::size_t layer_count() const {
        return layer_order.size();
    }
    const LayerRecord& layer_at(std::size_t index) const;
    LayerRecord& layer_at(std::size_t index);
    const LayerRecord& layer_by_id(const std::string& id) const;
    LayerRecord& layer_by_id(const std::string& id);

    /// Every editable JSON document with its bundle-relative path:
    /// manifest, repositories (when present), image config, and each
    /// layer's metadata document.
    std::vector<std::pair<std::string, std::string*>> documents();
    std::vector<std::pair<std::string, const std::string*>> documents() const;

    /// Re-derives the parsed views (manifest entries, config fields,
    /// repositories map) from the raw documents after a textual edit.
    void reindex();

    friend bool operator==(const ImageBundle& a, const ImageBundle& b);
};

/// Reads a `docker save`-layout archive into a fully indexed bundle.
ImageBundle load_bundle(const std::filesystem::path& archive_path);

/// Writes the bundle as a tar archive: members sorted lexicographically,
/// unmodified documents byte-identical. Returns `out_path`.
std::filesystem::path save_bundle(const ImageBundle& bundle, const std::filesystem::path& out_path);

/// Opens a directory laid out like an unpacked bundle. Edits write back via
/// flush_store without an export/import cycle.
ImageBundle open_store(const std::filesystem::path& store_root);

/// Writes changed documents and payloads back to the store the bundle was
/// opened from; untouched files are not rewritten. Returns the paths
/// written, store-relative.
std::vector<std::string> flush_store(ImageBundle& bundle);

/// Applies layer payloads [0, upto] base first. Later entries overwrite
/// earlier ones; whiteout members delete and are not emitted.
FileTree flatten(const ImageBundle& bundle, std::size_t upto);

/// Flatten over all layers.
FileTree flatten_all(const ImageBundle& bundle);

/// Materializes a single layer payload as a file tree.
FileTree layer_tree(const LayerRecord& layer);

/// "<id>/layer.tar" -> "<id>"; empty string when the shape is different.
std::string layer_id_from_path(std::string_view layer_path);

} // namespace layerpatch
