#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace layerpatch {

enum class EntryKind {
    File,
    Dir,
    Symlink,
};

struct TreeEntry {
    std::vector<std::uint8_t> content; // symlink: target path bytes
    std::uint32_t mode = 0644;
    EntryKind kind = EntryKind::File;

    friend bool operator==(const TreeEntry&, const TreeEntry&) = default;
};

/// Normalized path -> entry map. Paths carry no leading '/', no '.' or '..'
/// segments, and no trailing '/'.
struct FileTree {
    std::map<std::string, TreeEntry> entries;

    bool contains(const std::string& path) const {
        return entries.count(path) != 0;
    }

    void put_file(std::string path, std::string_view content, std::uint32_t mode = 0644);
    void put_dir(std::string path, std::uint32_t mode = 0755);
    void put_symlink(std::string path, std::string_view target);

    /// Inserts `entry` at `path`, displacing whatever was there. Replacing a
    /// directory with a non-directory drops the subtree underneath it.
    void place(const std::string& path, TreeEntry entry);

    /// Removes `path` and, for directories, everything underneath it.
    void remove_subtree(const std::string& path);

    std::uint64_t total_content_bytes() const;

    friend bool operator==(const FileTree&, const FileTree&) = default;
};

/// Strips leading "./" and "/" segments, folds repeats, rejects "..".
/// Returns the cleaned path; empty result means "the root itself".
std::string normalize_path(std::string_view raw);

const std::string kWhiteoutPrefix = ".wh.";

/// True if the final path segment carries the whiteout marker; `target`
/// receives the path the marker deletes.
bool is_whiteout(const std::string& path, std::string* target);

/// Reads a directory recursively into a tree (regular files, directories,
/// symlinks). Paths are relative to `root`.
FileTree tree_from_directory(const std::filesystem::path& root);

} // namespace layerpatch
