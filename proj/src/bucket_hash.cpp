#include "lsifr/bucket_hash.hpp"

#include <openssl/evp.h>
#include <openssl/provider.h>
#include <zlib.h>

#include <bit>
#include <cstring>
#include <mutex>

#include "lsifr/errors.hpp"

namespace lsifr {

const std::array<uint8_t, 256> kTranTable = {
    0x02, 0xD6, 0x9E, 0x6F, 0xF9, 0x1D, 0x04, 0xAB, 0xD0, 0x22, 0x16, 0x1F, 0xD8, 0x73, 0xA1, 0xAC,
    0x3B, 0x70, 0x62, 0x96, 0x1E, 0x6E, 0x8F, 0x39, 0x9D, 0x05, 0x14, 0x4A, 0xA6, 0xBE, 0xAE, 0x0E,
    0xCF, 0xB9, 0x9C, 0x9A, 0xC7, 0x68, 0x13, 0xE1, 0x2D, 0xA4, 0xEB, 0x51, 0x8D, 0x64, 0x6B, 0x50,
    0x23, 0x80, 0x03, 0x41, 0xEC, 0xBB, 0x71, 0xCC, 0x7A, 0x86, 0x7F, 0x98, 0xF2, 0x36, 0x5E, 0xEE,
    0x8E, 0xCE, 0x4F, 0xB8, 0x32, 0xB6, 0x5F, 0x59, 0xDC, 0x1B, 0x31, 0x4C, 0x7B, 0xF0, 0x63, 0x01,
    0x6C, 0xBA, 0x07, 0xE8, 0x12, 0x77, 0x49, 0x3C, 0xDA, 0x46, 0xFE, 0x2F, 0x79, 0x1C, 0x9B, 0x30,
    0xE3, 0x00, 0x06, 0x7E, 0x2E, 0x0F, 0x38, 0x33, 0x21, 0xAD, 0xA5, 0x54, 0xCA, 0xA7, 0x29, 0xFC,
    0x5A, 0x47, 0x69, 0x7D, 0xC5, 0x95, 0xB5, 0xF4, 0x0B, 0x90, 0xA3, 0x81, 0x6D, 0x25, 0x55, 0x35,
    0xF5, 0x75, 0x74, 0x0A, 0x26, 0xBF, 0x19, 0x5C, 0x1A, 0xC6, 0xFF, 0x99, 0x5D, 0x84, 0xAA, 0x66,
    0x3E, 0xAF, 0x78, 0xB3, 0x20, 0x43, 0xC1, 0xED, 0x24, 0xEA, 0xE6, 0x3F, 0x18, 0xF3, 0xA0, 0x42,
    0x57, 0x08, 0x53, 0x60, 0xC3, 0xC0, 0x83, 0x40, 0x82, 0xD7, 0x09, 0xBD, 0x44, 0x2A, 0x67, 0xA8,
    0x93, 0xE0, 0xC2, 0x56, 0x9F, 0xD9, 0xDD, 0x85, 0x15, 0xB4, 0x8A, 0x27, 0x28, 0x92, 0x76, 0xDE,
    0xEF, 0xF8, 0xB2, 0xB7, 0xC9, 0x3D, 0x45, 0x94, 0x4B, 0x11, 0x0D, 0x65, 0xD5, 0x34, 0x8B, 0x91,
    0x0C, 0xFA, 0x87, 0xE9, 0x7C, 0x5B, 0xB1, 0x4D, 0xE5, 0xD4, 0xCB, 0x10, 0xA2, 0x17, 0x89, 0xBC,
    0xDB, 0xB0, 0xE2, 0x97, 0x88, 0x52, 0xF7, 0x48, 0xD3, 0x61, 0x2C, 0x3A, 0x2B, 0xD1, 0x8C, 0xFB,
    0xF1, 0xCD, 0xE4, 0x6A, 0xE7, 0xA9, 0xFD, 0xC4, 0x37, 0xC8, 0xD2, 0xF6, 0xDF, 0x58, 0x72, 0x4E,
};

uint8_t tran53_trigram(uint8_t a, uint8_t b, uint8_t c, uint8_t salt) {
    const auto& t = kTranTable;
    uint32_t v = (t[(a + salt) & 0xFF] ^ (t[b] * (salt + salt + 1))) + t[c ^ t[salt]];
    return static_cast<uint8_t>(v & 0xFF);
}

uint8_t tran53_fold(std::span<const uint8_t> gram) {
    uint8_t h = 0;
    for (size_t j = 0; j < gram.size(); ++j) {
        h = kTranTable[static_cast<uint8_t>(h + gram[j] + j)];
    }
    return h;
}

namespace {

uint32_t fnv1a32(std::span<const uint8_t> data) {
    uint32_t h = 0x811C9DC5u;
    for (uint8_t b : data) {
        h ^= b;
        h *= 0x01000193u;
    }
    return h;
}

uint64_t fnv1_64(std::span<const uint8_t> data) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (uint8_t b : data) {
        h *= 0x100000001B3ull;
        h ^= b;
    }
    return h;
}

uint64_t fnv1a64(std::span<const uint8_t> data) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (uint8_t b : data) {
        h ^= b;
        h *= 0x100000001B3ull;
    }
    return h;
}

// MurmurHash3 x86 32-bit, seed 0.
uint32_t mmh3_32(std::span<const uint8_t> data) {
    constexpr uint32_t c1 = 0xCC9E2D51u;
    constexpr uint32_t c2 = 0x1B873593u;
    uint32_t h = 0;
    const size_t nblocks = data.size() / 4;
    for (size_t i = 0; i < nblocks; ++i) {
        uint32_t k;
        std::memcpy(&k, data.data() + i * 4, 4); // little-endian block read
        k *= c1;
        k = std::rotl(k, 15);
        k *= c2;
        h ^= k;
        h = std::rotl(h, 13);
        h = h * 5 + 0xE6546B64u;
    }
    uint32_t k = 0;
    const uint8_t* tail = data.data() + nblocks * 4;
    switch (data.size() & 3) {
        case 3: k ^= static_cast<uint32_t>(tail[2]) << 16; [[fallthrough]];
        case 2: k ^= static_cast<uint32_t>(tail[1]) << 8; [[fallthrough]];
        case 1:
            k ^= tail[0];
            k *= c1;
            k = std::rotl(k, 15);
            k *= c2;
            h ^= k;
    }
    h ^= static_cast<uint32_t>(data.size());
    h ^= h >> 16;
    h *= 0x85EBCA6Bu;
    h ^= h >> 13;
    h *= 0xC2B2AE35u;
    h ^= h >> 16;
    return h;
}

// EVP message digests, fetched once. MD4 and WHIRLPOOL live in the
// legacy provider under OpenSSL 3.
class EvpDigests {
public:
    static const EvpDigests& instance() {
        static EvpDigests digests;
        return digests;
    }

    const EVP_MD* get(HashKind kind) const {
        const EVP_MD* md = nullptr;
        switch (kind) {
            case HashKind::SHA512: md = sha512_; break;
            case HashKind::SHA384: md = sha384_; break;
            case HashKind::SHA256: md = sha256_; break;
            case HashKind::SHA224: md = sha224_; break;
            case HashKind::SHA1: md = sha1_; break;
            case HashKind::MD5: md = md5_; break;
            case HashKind::MD4: md = md4_; break;
            case HashKind::WHIRLPOOL: md = whirlpool_; break;
            default: break;
        }
        if (md == nullptr) {
            throw error("message digest backend unavailable for " + to_string(kind));
        }
        return md;
    }

private:
    EvpDigests() {
        OSSL_PROVIDER_load(nullptr, "default");
        OSSL_PROVIDER_load(nullptr, "legacy");
        sha512_ = EVP_MD_fetch(nullptr, "SHA512", nullptr);
        sha384_ = EVP_MD_fetch(nullptr, "SHA384", nullptr);
        sha256_ = EVP_MD_fetch(nullptr, "SHA256", nullptr);
        sha224_ = EVP_MD_fetch(nullptr, "SHA224", nullptr);
        sha1_ = EVP_MD_fetch(nullptr, "SHA1", nullptr);
        md5_ = EVP_MD_fetch(nullptr, "MD5", nullptr);
        md4_ = EVP_MD_fetch(nullptr, "MD4", nullptr);
        whirlpool_ = EVP_MD_fetch(nullptr, "WHIRLPOOL", nullptr);
    }

    EVP_MD* sha512_ = nullptr;
    EVP_MD* sha384_ = nullptr;
    EVP_MD* sha256_ = nullptr;
    EVP_MD* sha224_ = nullptr;
    EVP_MD* sha1_ = nullptr;
    EVP_MD* md5_ = nullptr;
    EVP_MD* md4_ = nullptr;
    EVP_MD* whirlpool_ = nullptr;
};

uint64_t wide_digest_value(HashKind kind, std::span<const uint8_t> gram) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int out_len = 0;
    const EVP_MD* md = EvpDigests::instance().get(kind);
    if (EVP_Digest(gram.data(), gram.size(), out, &out_len, md, nullptr) != 1 || out_len < 8) {
        throw error("message digest computation failed for " + to_string(kind));
    }
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | out[i];
    }
    return v;
}

} // namespace

uint64_t hash_value(HashKind kind, std::span<const uint8_t> gram) {
    switch (kind) {
        case HashKind::TRAN53: return tran53_fold(gram);
        case HashKind::FNV164: return fnv1_64(gram);
        case HashKind::FNV1A32: return fnv1a32(gram);
        case HashKind::FNV1A64: return fnv1a64(gram);
        case HashKind::MMH3: return mmh3_32(gram);
        case HashKind::CRC32:
            return static_cast<uint32_t>(::crc32(0L, gram.data(), static_cast<uInt>(gram.size())));
        case HashKind::ADLER32:
            return static_cast<uint32_t>(
                ::adler32(1L, gram.data(), static_cast<uInt>(gram.size())));
        default: return wide_digest_value(kind, gram);
    }
}

uint32_t bucket_index(std::span<const uint8_t> gram, HashKind kind, uint32_t accumulator_size) {
    if (gram.empty()) throw constraint_error("bucket_index: empty gram");
    if (accumulator_size == 0) throw constraint_error("bucket_index: zero accumulator size");
    return static_cast<uint32_t>(hash_value(kind, gram) % accumulator_size);
}

} // namespace lsifr
