#include "layerpatch/file_tree.hpp"

#include <fstream>

#include "layerpatch/errors.hpp"

namespace layerpatch {

void FileTree::put_file(std::string path, std::string_view content, std::uint32_t mode) {
    TreeEntry e;
    e.content.assign(content.begin(), content.end());
    e.mode = mode;
    e.kind = EntryKind::File;
    place(normalize_path(path), std::move(e));
}

void FileTree::put_dir(std::string path, std::uint32_t mode) {
    TreeEntry e;
    e.mode = mode;
    e.kind = EntryKind::Dir;
    place(normalize_path(path), std::move(e));
}

void FileTree::put_symlink(std::string path, std::string_view target) {
    TreeEntry e;
    e.content.assign(target.begin(), target.end());
    e.mode = 0777;
    e.kind = EntryKind::Symlink;
    place(normalize_path(path), std::move(e));
}

void FileTree::place(const std::string& path, TreeEntry entry) {
    auto it = entries.find(path);
    if (it != entries.end() && it->second.kind == EntryKind::Dir && entry.kind != EntryKind::Dir) {
        remove_subtree(path);
    }
    entries[path] = std::move(entry);
}

void FileTree::remove_subtree(const std::string& path) {
    entries.erase(path);
    std::string prefix = path + "/";
    auto it = entries.lower_bound(prefix);
    while (it != entries.end() && it->first.compare(0, prefix.size(), prefix) == 0) {
        it = entries.erase(it);
    }
}

std::uint64_t FileTree::total_content_bytes() const {
    std::uint64_t total = 0;
    for (const auto& [path, entry] : entries) {
        total += entry.content.size();
    }
    return total;
}

std::string normalize_path(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        std::size_t j = raw.find('/', i);
        if (j == std::string_view::npos) {
            j = raw.size();
        }
        std::string_view seg = raw.substr(i, j - i);
        if (seg == "..") {
            raise(Errc::CorruptPayload, "path escapes the tree: " + std::string(raw));
        }
        if (!seg.empty() && seg != ".") {
            if (!out.empty()) {
                out += '/';
            }
            out.append(seg);
        }
        i = j + 1;
    }
    return out;
}

FileTree tree_from_directory(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        raise(Errc::NotADirectory, root.string());
    }
    FileTree tree;
    for (const auto& item : std::filesystem::recursive_directory_iterator(
             root, std::filesystem::directory_options::none)) {
        std::string rel =
            normalize_path(std::filesystem::relative(item.path(), root).generic_string());
        if (rel.empty()) {
            continue;
        }
        if (item.is_symlink()) {
            tree.put_symlink(rel, std::filesystem::read_symlink(item.path()).generic_string());
        } else if (item.is_directory()) {
            tree.put_dir(rel);
        } else if (item.is_regular_file()) {
            std::ifstream in(item.path(), std::ios::binary);
            if (!in) {
                raise(Errc::IoFailure, item.path().string());
            }
            TreeEntry entry;
            entry.content.assign(std::istreambuf_iterator<char>(in),
                                 std::istreambuf_iterator<char>());
            entry.kind = EntryKind::File;
            std::filesystem::perms perms = item.status().permissions();
            entry.mode = static_cast<std::uint32_t>(perms) & 07777;
            tree.entries[rel] = std::move(entry);
        }
    }
    return tree;
}

bool is_whiteout(const std::string& path, std::string* target) {
    std::size_t slash = path.rfind('/');
    std::size_t base = (slash == std::string::npos) ? 0 : slash + 1;
    if (path.compare(base, kWhiteoutPrefix.size(), kWhiteoutPrefix) != 0) {
        return false;
    }
    if (target != nullptr) {
        *target = path.substr(0, base) + path.substr(base + kWhiteoutPrefix.size());
    }
    return true;
}

} // namespace layerpatch
