#include "layerpatch/tar.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "layerpatch/errors.hpp"

namespace layerpatch {

namespace {

constexpr std::size_t kBlock = 512;

// ustar header field offsets/lengths
constexpr std::size_t kName = 0, kNameLen = 100;
constexpr std::size_t kMode = 100, kModeLen = 8;
constexpr std::size_t kUid = 108, kUidLen = 8;
constexpr std::size_t kGid = 116, kGidLen = 8;
constexpr std::size_t kSize = 124, kSizeLen = 12;
constexpr std::size_t kMtime = 136, kMtimeLen = 12;
constexpr std::size_t kChksum = 148, kChksumLen = 8;
constexpr std::size_t kTypeflag = 156;
constexpr std::size_t kLinkname = 157, kLinknameLen = 100;
constexpr std::size_t kMagic = 257;
constexpr std::size_t kPrefix = 345, kPrefixLen = 155;

std::uint64_t parse_octal(const std::uint8_t* field, std::size_t len) {
    std::uint64_t value = 0;
    std::size_t i = 0;
    while (i < len && (field[i] == ' ' || field[i] == 0)) {
        ++i;
    }
    for (; i < len; ++i) {
        std::uint8_t c = field[i];
        if (c == ' ' || c == 0) {
            break;
        }
        if (c < '0' || c > '7') {
            raise(Errc::CorruptPayload, "bad octal field in tar header");
        }
        value = value * 8 + (c - '0');
    }
    return value;
}

void write_octal(std::uint8_t* field, std::size_t len, std::uint64_t value) {
    // len-1 octal digits, NUL terminated
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*llo", static_cast<int>(len - 1),
                  static_cast<unsigned long long>(value));
    std::memcpy(field, buf, len - 1);
    field[len - 1] = 0;
}

std::string read_string(const std::uint8_t* field, std::size_t len) {
    std::size_t n = 0;
    while (n < len && field[n] != 0) {
        ++n;
    }
    return std::string(reinterpret_cast<const char*>(field), n);
}

std::uint32_t header_checksum(const std::array<std::uint8_t, 512>& header) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
        if (i >= kChksum && i < kChksum + kChksumLen) {
            sum += ' ';
        } else {
            sum += header[i];
        }
    }
    return sum;
}

void seal_checksum(std::array<std::uint8_t, 512>& header) {
    std::uint32_t sum = header_checksum(header);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%06o", sum);
    std::memcpy(header.data() + kChksum, buf, 6);
    header[kChksum + 6] = 0;
    header[kChksum + 7] = ' ';
}

bool is_zero_block(const std::uint8_t* block) {
    for (std::size_t i = 0; i < kBlock; ++i) {
        if (block[i] != 0) {
            return false;
        }
    }
    return true;
}

void set_path_fields(std::array<std::uint8_t, 512>& header, std::string_view path) {
    if (path.size() <= kNameLen) {
        std::memcpy(header.data() + kName, path.data(), path.size());
        return;
    }
    // split across prefix/name at a '/' so both halves fit
    std::size_t split = path.rfind('/', kPrefixLen);
    if (split == std::string_view::npos || path.size() - split - 1 > kNameLen) {
        raise(Errc::CorruptPayload, "tar path too long: " + std::string(path));
    }
    std::memcpy(header.data() + kPrefix, path.data(), split);
    std::memcpy(header.data() + kName, path.data() + split + 1, path.size() - split - 1);
}

std::array<std::uint8_t, 512> fresh_header(std::string_view path, std::uint64_t size,
                                           std::uint32_t mode, char typeflag,
                                           std::string_view linkname, std::uint64_t mtime) {
    std::array<std::uint8_t, 512> h{};
    set_path_fields(h, path);
    write_octal(h.data() + kMode, kModeLen, mode & 07777);
    write_octal(h.data() + kUid, kUidLen, 0);
    write_octal(h.data() + kGid, kGidLen, 0);
    write_octal(h.data() + kSize, kSizeLen, size);
    write_octal(h.data() + kMtime, kMtimeLen, mtime);
    h[kTypeflag] = static_cast<std::uint8_t>(typeflag);
    if (!linkname.empty()) {
        if (linkname.size() > kLinknameLen) {
            raise(Errc::CorruptPayload, "tar linkname too long");
        }
        std::memcpy(h.data() + kLinkname, linkname.data(), linkname.size());
    }
    std::memcpy(h.data() + kMagic, "ustar", 6); // magic incl. NUL
    h[kMagic + 6] = '0';
    h[kMagic + 7] = '0';
    seal_checksum(h);
    return h;
}

} // namespace

std::string TarMember::path() const {
    std::string name = read_string(header.data() + kName, kNameLen);
    std::string prefix = read_string(header.data() + kPrefix, kPrefixLen);
    if (prefix.empty()) {
        return name;
    }
    return prefix + "/" + name;
}

std::string TarMember::normalized_path() const {
    return normalize_path(path());
}

std::uint64_t TarMember::size() const {
    return parse_octal(header.data() + kSize, kSizeLen);
}

std::uint32_t TarMember::mode() const {
    return static_cast<std::uint32_t>(parse_octal(header.data() + kMode, kModeLen));
}

char TarMember::typeflag() const {
    return static_cast<char>(header[kTypeflag]);
}

std::string TarMember::linkname() const {
    return read_string(header.data() + kLinkname, kLinknameLen);
}

std::uint64_t TarMember::mtime() const {
    return parse_octal(header.data() + kMtime, kMtimeLen);
}

void TarMember::set_content(std::vector<std::uint8_t> bytes) {
    content = std::move(bytes);
    write_octal(header.data() + kSize, kSizeLen, content.size());
    seal_checksum(header);
}

TarMember TarMember::make_file(std::string_view path, std::span<const std::uint8_t> content,
                               std::uint32_t mode, std::uint64_t mtime) {
    TarMember m;
    m.header = fresh_header(path, content.size(), mode, '0', {}, mtime);
    m.content.assign(content.begin(), content.end());
    return m;
}

TarMember TarMember::make_dir(std::string_view path, std::uint32_t mode, std::uint64_t mtime) {
    std::string slashed = std::string(path);
    if (!slashed.ends_with('/')) {
        slashed += '/';
    }
    TarMember m;
    m.header = fresh_header(slashed, 0, mode, '5', {}, mtime);
    return m;
}

TarMember TarMember::make_symlink(std::string_view path, std::string_view target) {
    TarMember m;
    m.header = fresh_header(path, 0, 0777, '2', target, 0);
    return m;
}

TarArchive TarArchive::parse(std::span<const std::uint8_t> bytes) {
    TarArchive archive;
    std::size_t pos = 0;
    while (pos + kBlock <= bytes.size()) {
        const std::uint8_t* block = bytes.data() + pos;
        if (is_zero_block(block)) {
            break; // end-of-archive marker; trailing blocks ignored
        }
        TarMember m;
        std::memcpy(m.header.data(), block, kBlock);
        std::uint32_t stored = static_cast<std::uint32_t>(
            parse_octal(m.header.data() + kChksum, kChksumLen));
        if (stored != header_checksum(m.header)) {
            raise(Errc::CorruptPayload, "tar header checksum mismatch at offset " +
                                            std::to_string(pos));
        }
        std::uint64_t size = m.size();
        pos += kBlock;
        if (pos + size > bytes.size()) {
            raise(Errc::CorruptPayload, "tar member truncated: " + m.path());
        }
        m.content.assign(bytes.data() + pos, bytes.data() + pos + size);
        pos += (size + kBlock - 1) / kBlock * kBlock;
        archive.members.push_back(std::move(m));
    }
    return archive;
}

std::vector<std::uint8_t> TarArchive::serialize() const {
    std::size_t total = 2 * kBlock;
    for (const TarMember& m : members) {
        total += kBlock + (m.content.size() + kBlock - 1) / kBlock * kBlock;
    }
    std::vector<std::uint8_t> out;
    out.reserve(total);
    for (const TarMember& m : members) {
        out.insert(out.end(), m.header.begin(), m.header.end());
        out.insert(out.end(), m.content.begin(), m.content.end());
        out.resize(out.size() + (kBlock - m.content.size() % kBlock) % kBlock, 0);
    }
    out.resize(out.size() + 2 * kBlock, 0);
    return out;
}

TarMember* TarArchive::find(std::string_view normalized) {
    for (TarMember& m : members) {
        if (m.normalized_path() == normalized) {
            return &m;
        }
    }
    return nullptr;
}

const TarMember* TarArchive::find(std::string_view normalized) const {
    return const_cast<TarArchive*>(this)->find(normalized);
}

FileTree tree_from_tar(std::span<const std::uint8_t> bytes) {
    FileTree tree;
    apply_layer_to_tree(tree, bytes);
    return tree;
}

void apply_layer_to_tree(FileTree& acc, std::span<const std::uint8_t> payload) {
    TarArchive archive = TarArchive::parse(payload);
    for (const TarMember& m : archive.members) {
        std::string path = m.normalized_path();
        if (path.empty()) {
            continue;
        }
        std::string target;
        if (is_whiteout(path, &target)) {
            acc.remove_subtree(target);
            continue;
        }
        TreeEntry e;
        switch (m.typeflag()) {
        case '0':
        case 0:
            e.kind = EntryKind::File;
            e.content = m.content;
            break;
        case '5':
            e.kind = EntryKind::Dir;
            break;
        case '2':
            e.kind = EntryKind::Symlink;
            {
                std::string target_path = m.linkname();
                e.content.assign(target_path.begin(), target_path.end());
            }
            break;
        default:
            continue; // other member kinds carry no tree content
        }
        e.mode = m.mode();
        acc.place(path, std::move(e));
    }
}

std::vector<std::uint8_t> tar_from_tree(const FileTree& tree) {
    TarArchive archive;
    for (const auto& [path, entry] : tree.entries) {
        switch (entry.kind) {
        case EntryKind::File:
            archive.members.push_back(TarMember::make_file(path, entry.content, entry.mode));
            break;
        case EntryKind::Dir:
            archive.members.push_back(TarMember::make_dir(path, entry.mode));
            break;
        case EntryKind::Symlink:
            archive.members.push_back(TarMember::make_symlink(
                path, std::string_view(reinterpret_cast<const char*>(entry.content.data()),
                                       entry.content.size())));
            break;
        }
    }
    return archive.serialize();
}

} // namespace layerpatch
