#include "layerpatch/integrity.hpp"

#include "layerpatch/errors.hpp"

namespace layerpatch {

std::size_t RewriteReport::total() const {
    std::size_t sum = 0;
    for (const auto& [path, count] : occurrences) {
        sum += count;
    }
    return sum;
}

Digest layer_digest(const LayerRecord& layer) {
    return sha256(layer.payload);
}

RewriteReport rewrite_digest(ImageBundle& bundle, const Digest& old_digest,
                             const Digest& new_digest) {
    if (old_digest == new_digest) {
        raise(Errc::InvalidDigest, "rewrite requires distinct digests");
    }
    RewriteReport report;
    report.old_digest = old_digest;
    report.new_digest = new_digest;
    for (auto& [path, doc] : bundle.documents()) {
        std::size_t count = replace_hex_token(*doc, old_digest.hex(), new_digest.hex());
        if (count > 0) {
            report.occurrences.emplace_back(path, count);
        }
    }
    if (report.total() == 0) {
        raise(Errc::RewriteMiss, old_digest.hex());
    }
    bundle.reindex();
    return report;
}

std::vector<IntegrityRow> verify_integrity(const ImageBundle& bundle) {
    std::vector<IntegrityRow> rows;
    rows.reserve(bundle.layer_count());
    for (std::size_t i = 0; i < bundle.layer_count(); ++i) {
        const LayerRecord& layer = bundle.layer_at(i);
        IntegrityRow row;
        row.layer_id = layer.id;
        row.recorded = layer.recorded_checksum();
        row.actual = layer_digest(layer);
        row.ok = row.recorded == row.actual;
        rows.push_back(std::move(row));
    }
    return rows;
}

bool all_ok(const std::vector<IntegrityRow>& rows) {
    for (const IntegrityRow& row : rows) {
        if (!row.ok) {
            return false;
        }
    }
    return true;
}

} // namespace layerpatch
