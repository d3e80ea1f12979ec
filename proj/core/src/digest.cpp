#include "layerpatch/digest.hpp"

#include <bit>
#include <cstring>

#include "layerpatch/errors.hpp"

namespace layerpatch {

namespace {

bool is_hex_digit(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

// FIPS 180-4 round constants: fractional parts of the cube roots of the
// first 64 primes.
constexpr std::array<std::uint32_t, 64> kRoundConstants = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
};

// Initial hash value H(0): fractional parts of the square roots of the
// first 8 primes.
constexpr std::array<std::uint32_t, 8> kInitialState = {
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
};

inline std::uint32_t rotr(std::uint32_t x, int n) {
    return std::rotr(x, n);
}

inline std::uint32_t big_sigma0(std::uint32_t x) {
    return rotr(x, 2) ^ rotr(x, 13) ^ rotr(x, 22);
}
inline std::uint32_t big_sigma1(std::uint32_t x) {
    return rotr(x, 6) ^ rotr(x, 11) ^ rotr(x, 25);
}
inline std::uint32_t small_sigma0(std::uint32_t x) {
    return rotr(x, 7) ^ rotr(x, 18) ^ (x >> 3);
}
inline std::uint32_t small_sigma1(std::uint32_t x) {
    return rotr(x, 17) ^ rotr(x, 19) ^ (x >> 10);
}
inline std::uint32_t ch(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return (x & y) ^ (~x & z);
}
inline std::uint32_t maj(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return (x & y) ^ (x & z) ^ (y & z);
}

} // namespace

Digest Digest::from_hex(std::string_view hex) {
    if (!is_valid_hex(hex)) {
        raise(Errc::InvalidDigest, std::string(hex));
    }
    Digest d;
    d.hex_.assign(hex);
    return d;
}

bool Digest::is_valid_hex(std::string_view hex) {
    if (hex.size() != 64) {
        return false;
    }
    for (char c : hex) {
        if (!is_hex_digit(c)) {
            return false;
        }
    }
    return true;
}

Sha256::Sha256() : state_(kInitialState) {}

void Sha256::update(std::span<const std::uint8_t> data) {
    total_bytes_ += data.size();
    const std::uint8_t* p = data.data();
    std::size_t n = data.size();

    if (buffered_ > 0) {
        std::size_t take = std::min(n, buffer_.size() - buffered_);
        std::memcpy(buffer_.data() + buffered_, p, take);
        buffered_ += take;
        p += take;
        n -= take;
        if (buffered_ == buffer_.size()) {
            compress(buffer_.data());
            buffered_ = 0;
        }
    }
    while (n >= 64) {
        compress(p);
        p += 64;
        n -= 64;
    }
    if (n > 0) {
        std::memcpy(buffer_.data(), p, n);
        buffered_ = n;
    }
}

void Sha256::update(std::string_view data) {
    update(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Digest Sha256::finish() {
    // Pad with 0x80, zeros, then the 64-bit big-endian bit length, so the
    // total length is a multiple of 512 bits.
    const std::uint64_t bit_length = total_bytes_ * 8;
    std::uint8_t pad[72] = {0x80};
    std::size_t pad_len = 1;
    std::size_t rem = (buffered_ + 1) % 64;
    std::size_t zeros = (rem <= 56) ? (56 - rem) : (120 - rem);
    pad_len += zeros;
    for (int i = 0; i < 8; ++i) {
        pad[pad_len + i] = static_cast<std::uint8_t>(bit_length >> (56 - 8 * i));
    }
    pad_len += 8;

    update(std::span(pad, pad_len));
    finished_ = true;

    std::string hex(64, '0');
    static const char* k = "0123456789abcdef";
    for (int i = 0; i < 8; ++i) {
        std::uint32_t w = state_[i];
        for (int j = 0; j < 4; ++j) {
            std::uint8_t b = static_cast<std::uint8_t>(w >> (24 - 8 * j));
            hex[i * 8 + j * 2] = k[b >> 4];
            hex[i * 8 + j * 2 + 1] = k[b & 0xf];
        }
    }
    return Digest::from_hex(hex);
}

void Sha256::compress(const std::uint8_t* block) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = (std::uint32_t(block[i * 4]) << 24) | (std::uint32_t(block[i * 4 + 1]) << 16) |
               (std::uint32_t(block[i * 4 + 2]) << 8) | std::uint32_t(block[i * 4 + 3]);
    }
    for (int i = 16; i < 64; ++i) {
        w[i] = small_sigma1(w[i - 2]) + w[i - 7] + small_sigma0(w[i - 15]) + w[i - 16];
    }

    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];

    for (int i = 0; i < 64; ++i) {
        std::uint32_t t1 = h + big_sigma1(e) + ch(e, f, g) + kRoundConstants[i] + w[i];
        std::uint32_t t2 = big_sigma0(a) + maj(a, b, c);
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }

    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
    ++blocks_;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Sha256 h;
    h.update(data);
    return h.finish();
}

Digest sha256(std::string_view data) {
    Sha256 h;
    h.update(data);
    return h.finish();
}

std::uint64_t sha256_padded_bit_length(std::uint64_t message_bytes) {
    // 1 byte of 0x80 marker plus 8 bytes of length, rounded up to 64 bytes.
    std::uint64_t blocks = (message_bytes + 1 + 8 + 63) / 64;
    return blocks * 512;
}

std::size_t replace_hex_token(std::string& doc, std::string_view old_hex, std::string_view new_hex) {
    if (old_hex.size() != 64 || new_hex.size() != 64) {
        raise(Errc::InvalidDigest, "hex tokens must be 64 chars");
    }
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = doc.find(old_hex, pos)) != std::string::npos) {
        bool left_hex = pos > 0 && is_hex_digit(doc[pos - 1]);
        bool right_hex = pos + 64 < doc.size() && is_hex_digit(doc[pos + 64]);
        if (left_hex || right_hex) {
            ++pos;
            continue;
        }
        doc.replace(pos, 64, new_hex);
        pos += 64;
        ++count;
    }
    return count;
}

} // namespace layerpatch
