#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "layerpatch/errors.hpp"
#include "layerpatch/tar.hpp"

#include "support/test_support.hpp"

using namespace layerpatch;

namespace {

FileTree sample_tree() {
    FileTree tree;
    tree.put_dir("app");
    tree.put_file("app/main.py", "print('x')\n");
    tree.put_file("app/data.bin", std::string(1500, '\x7f'), 0600);
    tree.put_symlink("app/link", "main.py");
    tree.put_file("top.txt", "top\n", 0755);
    return tree;
}

} // namespace

TEST_CASE("tree -> tar -> tree round trip") {
    FileTree tree = sample_tree();
    std::vector<std::uint8_t> bytes = tar_from_tree(tree);
    CHECK(bytes.size() % 512 == 0);
    FileTree back = tree_from_tar(bytes);
    CHECK(back == tree);
}

TEST_CASE("tar_from_tree is deterministic") {
    FileTree tree = sample_tree();
    CHECK(tar_from_tree(tree) == tar_from_tree(tree));
}

TEST_CASE("parse/serialize keeps untouched member bytes identical") {
    std::vector<std::uint8_t> bytes = tar_from_tree(sample_tree());
    TarArchive archive = TarArchive::parse(bytes);
    CHECK(archive.serialize() == bytes);
}

TEST_CASE("member content replacement patches only size and checksum") {
    std::vector<std::uint8_t> bytes = tar_from_tree(sample_tree());
    TarArchive archive = TarArchive::parse(bytes);
    TarMember* member = archive.find("app/data.bin");
    REQUIRE(member != nullptr);
    std::uint32_t mode_before = member->mode();
    std::uint64_t mtime_before = member->mtime();

    std::string next(977, 'Q');
    member->set_content(std::vector<std::uint8_t>(next.begin(), next.end()));
    CHECK(member->size() == 977);
    CHECK(member->mode() == mode_before);
    CHECK(member->mtime() == mtime_before);

    TarArchive reparsed = TarArchive::parse(archive.serialize());
    const TarMember* found = reparsed.find("app/data.bin");
    REQUIRE(found != nullptr);
    CHECK(std::string(found->content.begin(), found->content.end()) == next);
}

TEST_CASE("mtime differences do not reach the file tree") {
    FileTree tree;
    tree.put_file("a.py", "v1\n");
    TarArchive archive = TarArchive::parse(tar_from_tree(tree));
    REQUIRE(archive.members.size() == 1);

    TarMember touched = TarMember::make_file("a.py", archive.members[0].content, 0644, 1700000000);
    TarArchive other;
    other.members.push_back(touched);
    CHECK(tree_from_tar(other.serialize()) == tree_from_tar(archive.serialize()));
}

TEST_CASE("long paths survive via the prefix field") {
    std::string dir = "deeply/nested";
    for (int i = 0; i < 12; ++i) {
        dir += "/segment_" + std::to_string(i);
    }
    FileTree tree;
    tree.put_file(dir + "/leaf.txt", "leaf\n");
    REQUIRE(dir.size() > 100);
    FileTree back = tree_from_tar(tar_from_tree(tree));
    CHECK(back == tree);
}

TEST_CASE("whiteout members delete from the accumulated tree") {
    FileTree base;
    base.put_file("a.py", "v1\n");
    base.put_file("keep.py", "k\n");

    FileTree overlay;
    overlay.put_file(".wh.a.py", "");

    FileTree acc = tree_from_tar(tar_from_tree(base));
    apply_layer_to_tree(acc, tar_from_tree(overlay));
    CHECK_FALSE(acc.contains("a.py"));
    CHECK(acc.contains("keep.py"));
    CHECK_FALSE(acc.contains(".wh.a.py"));
}

TEST_CASE("garbage input raises CorruptPayload") {
    std::vector<std::uint8_t> garbage(1024, 0x5a);
    CHECK_THROWS_AS(TarArchive::parse(garbage), Error);
    try {
        TarArchive::parse(garbage);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CorruptPayload);
    }
}

TEST_CASE("truncated member raises CorruptPayload") {
    std::vector<std::uint8_t> bytes = tar_from_tree(sample_tree());
    // cut inside app/data.bin's 1500-byte content run
    bytes.resize(2048);
    CHECK_THROWS_AS(TarArchive::parse(bytes), Error);
}

TEST_CASE("empty payload parses as an empty archive") {
    std::vector<std::uint8_t> two_blocks(1024, 0);
    CHECK(TarArchive::parse(two_blocks).members.empty());
    CHECK(TarArchive::parse(std::vector<std::uint8_t>{}).members.empty());
}

TEST_CASE("path normalization") {
    CHECK(normalize_path("./a/b") == "a/b");
    CHECK(normalize_path("/a//b/") == "a/b");
    CHECK(normalize_path(".") == "");
    CHECK_THROWS_AS(normalize_path("a/../b"), Error);
}
