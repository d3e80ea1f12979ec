#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerpatch/file_tree.hpp"

namespace layerpatch {

/// One ustar archive member. The raw 512-byte header is authoritative:
/// untouched members re-serialize byte-identically, content edits patch
/// only the size and checksum fields.
struct TarMember {
    std::array<std::uint8_t, 512> header{};
    std::vector<std::uint8_t> content;

    std::string path() const;            // raw name incl. prefix field
    std::string normalized_path() const; // normalize_path(path())
    std::uint64_t size() const;
    std::uint32_t mode() const;
    char typeflag() const;
    std::string linkname() const;
    std::uint64_t mtime() const;

    /// Replaces content, re-encoding size and checksum; all other header
    /// bytes stay as they were.
    void set_content(std::vector<std::uint8_t> bytes);

    static TarMember make_file(std::string_view path, std::span<const std::uint8_t> content,
                               std::uint32_t mode = 0644, std::uint64_t mtime = 0);
    static TarMember make_dir(std::string_view path, std::uint32_t mode = 0755,
                              std::uint64_t mtime = 0);
    static TarMember make_symlink(std::string_view path, std::string_view target);
};

struct TarArchive {
    std::vector<TarMember> members;

    /// Parses a complete uncompressed tar. Throws Errc::CorruptPayload on
    /// malformed headers or truncated content.
    static TarArchive parse(std::span<const std::uint8_t> bytes);

    /// Members in order, each padded to 512, plus two terminating zero
    /// blocks.
    std::vector<std::uint8_t> serialize() const;

    TarMember* find(std::string_view normalized);
    const TarMember* find(std::string_view normalized) const;
};

/// Materializes the archive as a file tree. Whiteout members delete the
/// marked path from the tree built so far and are not themselves emitted.
FileTree tree_from_tar(std::span<const std::uint8_t> bytes);

/// Deterministic archive for a tree: members sorted by path, mtime 0,
/// uid/gid 0.
std::vector<std::uint8_t> tar_from_tree(const FileTree& tree);

/// Applies one layer payload on top of `acc` (overwrite semantics plus
/// whiteout handling).
void apply_layer_to_tree(FileTree& acc, std::span<const std::uint8_t> payload);

} // namespace layerpatch
