#pragma once

#include <string>
#include <utility>
#include <vector>

#include "layerpatch/bundle.hpp"
#include "layerpatch/digest.hpp"

namespace layerpatch {

struct RewriteReport {
    Digest old_digest;
    Digest new_digest;
    std::vector<std::pair<std::string, std::size_t>> occurrences; // doc path -> count

    std::size_t total() const;
};

struct IntegrityRow {
    std::string layer_id;
    Digest recorded;
    Digest actual;
    bool ok = false;
};

/// sha256 over the layer payload bytes.
Digest layer_digest(const LayerRecord& layer);

/// Replaces every textual occurrence of `old_digest` across the bundle's
/// JSON documents with `new_digest` (bare hex and "sha256:"-prefixed forms
/// both match; the prefix is preserved). Throws Errc::RewriteMiss when no
/// occurrence exists anywhere.
RewriteReport rewrite_digest(ImageBundle& bundle, const Digest& old_digest,
                             const Digest& new_digest);

/// One row per manifest-referenced layer: recorded checksum vs recomputed
/// payload digest. Mismatches are data, not errors.
std::vector<IntegrityRow> verify_integrity(const ImageBundle& bundle);

bool all_ok(const std::vector<IntegrityRow>& rows);

} // namespace layerpatch
