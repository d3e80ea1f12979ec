#include "layerpatch/injector.hpp"

#include <algorithm>

#include "layerpatch/errors.hpp"
#include "layerpatch/tar.hpp"

namespace layerpatch {

namespace {

TarMember member_from_delta(const FileDelta& delta) {
    switch (delta.entry.kind) {
    case EntryKind::Dir:
        return TarMember::make_dir(delta.path, delta.entry.mode);
    case EntryKind::Symlink:
        return TarMember::make_symlink(
            delta.path, std::string_view(reinterpret_cast<const char*>(delta.entry.content.data()),
                                         delta.entry.content.size()));
    case EntryKind::File:
    default:
        return TarMember::make_file(delta.path, delta.entry.content, delta.entry.mode);
    }
}

std::string fresh_layer_id(const ImageBundle& bundle, const std::string& old_id,
                           const Digest& payload_digest) {
    std::string id = sha256(old_id + payload_digest.hex()).hex();
    for (std::uint64_t salt = 0; bundle.layers.count(id) != 0; ++salt) {
        id = sha256(id + std::to_string(salt)).hex();
    }
    return id;
}

/// Replaces old_id with new_id in the manifest, repositories, and every
/// layer metadata document except `except_doc` (the original layer keeps
/// its own identity).
void repoint_layer_id(ImageBundle& bundle, const std::string& old_id, const std::string& new_id,
                      const std::string& except_doc) {
    for (auto& [path, doc] : bundle.documents()) {
        if (path == except_doc || path == bundle.config_path) {
            continue;
        }
        replace_hex_token(*doc, old_id, new_id);
    }
    bundle.reindex();
}

} // namespace

LayerRecord inject_files(const LayerRecord& layer, const std::vector<FileDelta>& deltas) {
    if (deltas.empty()) {
        return layer;
    }
    TarArchive archive;
    try {
        archive = TarArchive::parse(layer.payload);
    } catch (const Error& e) {
        raise(Errc::CorruptPayload, layer.id + ": " + e.detail());
    }

    for (const FileDelta& delta : deltas) {
        TarMember* member = archive.find(delta.path);
        switch (delta.op) {
        case DeltaOp::Modify: {
            if (member == nullptr) {
                raise(Errc::PathNotFound, delta.path);
            }
            if (delta.entry.kind == EntryKind::File && member->typeflag() != '5' &&
                member->typeflag() != '2') {
                member->set_content(delta.entry.content); // mode bits stay as recorded
            } else {
                *member = member_from_delta(delta);
            }
            break;
        }
        case DeltaOp::Delete: {
            if (member == nullptr) {
                raise(Errc::PathNotFound, delta.path);
            }
            archive.members.erase(archive.members.begin() + (member - archive.members.data()));
            break;
        }
        case DeltaOp::Add: {
            if (member != nullptr) {
                raise(Errc::PathExists, delta.path);
            }
            archive.members.push_back(member_from_delta(delta));
            break;
        }
        }
    }

    LayerRecord patched = layer;
    patched.payload = archive.serialize();
    patched.payload_digest = sha256(patched.payload);
    return patched;
}

std::string clone_layer(ImageBundle& bundle, const std::string& layer_id) {
    const LayerRecord& original = bundle.layer_by_id(layer_id);
    std::string new_id = fresh_layer_id(bundle, original.id, original.payload_digest);

    LayerRecord clone = original;
    clone.id = new_id;
    replace_hex_token(clone.metadata_json, layer_id, new_id);
    bundle.layers.emplace(new_id, std::move(clone));
    return new_id;
}

InjectionReceipt apply_changeset(ImageBundle& bundle, std::size_t layer_index,
                                 const std::vector<FileDelta>& deltas, InjectMode mode) {
    if (deltas.empty()) {
        raise(Errc::InvalidPlan, "Inject actions carry a non-empty delta list");
    }
    const LayerRecord& original = bundle.layer_at(layer_index);
    const std::string old_id = original.id;
    const Digest old_digest = original.payload_digest;

    LayerRecord patched = inject_files(original, deltas);
    if (patched.payload_digest == old_digest) {
        raise(Errc::InvalidPlan, "deltas left the payload unchanged");
    }

    InjectionReceipt receipt;
    receipt.old_layer_id = old_id;
    receipt.old_digest = old_digest;
    receipt.new_digest = patched.payload_digest;
    receipt.files_touched = deltas.size();
    for (const FileDelta& delta : deltas) {
        receipt.bytes_written += delta.entry.content.size();
    }

    if (mode == InjectMode::CloneFirst) {
        std::string new_id = fresh_layer_id(bundle, old_id, patched.payload_digest);
        patched.id = new_id;
        replace_hex_token(patched.metadata_json, old_id, new_id);
        bundle.layers.emplace(new_id, std::move(patched));
        repoint_layer_id(bundle, old_id, new_id, old_id + "/json");
        receipt.new_layer_id = new_id;
    } else {
        bundle.layers.at(old_id) = std::move(patched);
        receipt.new_layer_id = old_id;
    }

    receipt.rewrite = rewrite_digest(bundle, old_digest, receipt.new_digest);
    return receipt;
}

} // namespace layerpatch
