#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace layerpatch {

/// 64-character lowercase hex SHA-256 value. Used both as a layer checksum
/// and as the search key for checksum rewriting.
class Digest {
  public:
    Digest() = default;

    static Digest from_hex(std::string_view hex);
    static bool is_valid_hex(std::string_view hex);

    const std::string& hex() const noexcept {
        return hex_;
    }
    bool empty() const noexcept {
        return hex_.empty();
    }

    friend bool operator==(const Digest&, const Digest&) = default;
    friend auto operator<=>(const Digest&, const Digest&) = default;

  private:
    std::string hex_;
};

/// Incremental SHA-256 over arbitrary byte sequences. The message is padded
/// to a multiple of 512 bits, split into blocks M(1..N), and folded with
/// H(i) = H(i-1) + C_M(i)(H(i-1)) starting from the fixed initial state,
/// where + is word-wise addition mod 2^32.
class Sha256 {
  public:
    Sha256();

    void update(std::span<const std::uint8_t> data);
    void update(std::string_view data);

    /// Finalizes and returns the digest. The hasher must not be reused.
    Digest finish();

    /// Number of 512-bit blocks compressed so far (padding included once
    /// finish() has run). Test hook for the padding law.
    std::uint64_t blocks_processed() const noexcept {
        return blocks_;
    }

  private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffered_ = 0;
    std::uint64_t total_bytes_ = 0;
    std::uint64_t blocks_ = 0;
    bool finished_ = false;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// Total padded message length in bits for an input of `message_bytes`
/// bytes; always a multiple of 512.
std::uint64_t sha256_padded_bit_length(std::uint64_t message_bytes);

/// Replaces every occurrence of the 64-hex token `old_hex` in `doc` with
/// `new_hex`, leaving every other byte untouched. A match must not be
/// embedded in a longer hex run, so ids never get clobbered by a digest
/// that happens to be their substring. Returns the replacement count.
std::size_t replace_hex_token(std::string& doc, std::string_view old_hex, std::string_view new_hex);

} // namespace layerpatch
