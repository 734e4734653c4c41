#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "lsifr/params.hpp"

namespace lsifr {

/// The standard 256-entry Nilsimsa substitution table used by TRAN53.
extern const std::array<uint8_t, 256> kTranTable;

/// Classic trigram hash: value in [0,256) for bytes (a,b,c) under salt n.
uint8_t tran53_trigram(uint8_t a, uint8_t b, uint8_t c, uint8_t salt);

/// TRAN53 extended to arbitrary-length grams:
/// h <- T[(h + byte_j + j) mod 256] folded over the gram, h seeded to 0.
/// Coincides with a table fold for any length; yields values in [0,256).
uint8_t tran53_fold(std::span<const uint8_t> gram);

/// Integer reduction of the selected hash family over a gram.
/// Wide digests (SHA/MD/WHIRLPOOL) contribute their first 8 bytes read
/// big-endian; the fixed-width families return their native output.
uint64_t hash_value(HashKind kind, std::span<const uint8_t> gram);

/// Deterministic bucket for a gram: hash_value(kind, gram) mod accumulator_size.
/// Throws constraint_error on an empty gram.
uint32_t bucket_index(std::span<const uint8_t> gram, HashKind kind, uint32_t accumulator_size);

} // namespace lsifr
