#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layerpatch/bundle.hpp"
#include "layerpatch/digest.hpp"
#include "layerpatch/integrity.hpp"
#include "layerpatch/planner.hpp"

namespace layerpatch {

enum class InjectMode {
    InPlace,
    CloneFirst,
};

struct InjectionReceipt {
    std::string old_layer_id;
    std::string new_layer_id; // == old_layer_id for InPlace
    Digest old_digest;
    Digest new_digest;
    std::size_t files_touched = 0;
    std::uint64_t bytes_written = 0;
    RewriteReport rewrite;
};

/// Applies deltas directly to the layer's tar payload: Add appends, Modify
/// replaces in place preserving mode bits, Delete removes. Untouched member
/// bytes and ordering are preserved. Returns the patched record with a
/// recomputed payload digest; id and metadata are untouched.
LayerRecord inject_files(const LayerRecord& layer, const std::vector<FileDelta>& deltas);

/// Adds a byte-identical copy of the layer under a fresh id. Manifest and
/// config still point at the original.
std::string clone_layer(ImageBundle& bundle, const std::string& layer_id);

/// Full injection: patch the payload (into a clone by default), repoint
/// every id reference for CloneFirst, then rewrite every occurrence of the
/// old checksum with the new one so the bundle's integrity records stay
/// closed.
InjectionReceipt apply_changeset(ImageBundle& bundle, std::size_t layer_index,
                                 const std::vector<FileDelta>& deltas, InjectMode mode);

} // namespace layerpatch
