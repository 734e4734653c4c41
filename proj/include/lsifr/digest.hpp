#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsifr/params.hpp"

namespace lsifr {

/// Bucket frequency counters for one stream under one parameter point.
struct Accumulator {
    std::vector<uint64_t> counts;
    uint64_t total = 0;

    explicit Accumulator(size_t size) : counts(size, 0) {}

    void add(uint32_t bucket) {
        counts[bucket] += 1;
        total += 1;
    }
};

/// A-bit fingerprint of a byte stream, tagged with the parameters that
/// produced it. Bit i is stored at byte i/8, mask 0x80 >> (i%8), so the
/// hex serialization reads bits in order from the most significant bit
/// of byte 0.
class Digest {
public:
    Digest(std::vector<uint8_t> packed_bits, std::string params_id);

    size_t bit_length() const { return bytes_.size() * 8; }
    bool bit(size_t i) const { return (bytes_[i / 8] >> (7 - (i % 8))) & 1; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }
    const std::string& params_id() const { return params_id_; }

    /// Lowercase hex, bit_length()/4 characters.
    std::string to_hex() const;

    /// Parses a hex serialization; the expected bit length comes from the
    /// params identity. Throws format_error on bad characters or length.
    static Digest from_hex(std::string_view hex, const std::string& params_id);

    bool operator==(const Digest&) const = default;

private:
    std::vector<uint8_t> bytes_;
    std::string params_id_;
};

/// Similarity between two equal-parameter digests. raw counts matching
/// bit positions minus A/2; normalized is the matching fraction.
struct SimilarityScore {
    int raw = 0;
    double normalized = 0.0;
};

/// Named statistic over a non-empty list of ratios. Quantiles interpolate
/// linearly at rank q*(len-1); mode is the most frequent exact value with
/// ties broken toward the smallest; std is the population form.
double threshold_statistic(std::span<const double> ratios, ThresholdKind kind);

/// All order-preserving n-byte subsequences of a window, enumerated in
/// lexicographic order of the chosen positions. Requires 0 < n < window
/// length; the list has C(len, n) entries.
std::vector<std::vector<uint8_t>> window_ngrams(std::span<const uint8_t> window, int n);

/// Thresholded bit pattern for a bucket count vector: ratio_i = count_i /
/// mean(counts), bit_i = ratio_i > threshold_statistic(ratios, kind).
/// An all-zero count vector yields all-zero bits.
std::vector<bool> threshold_bits(std::span<const uint64_t> counts, ThresholdKind kind);

/// Streaming digest computation. Bytes may arrive in any chunking; the
/// result depends only on the concatenated stream and the parameters.
class Digester {
public:
    explicit Digester(const NilsimsaParams& params);

    void update(std::span<const uint8_t> data);
    void update(const void* data, size_t size);

    /// Snapshot digest of everything consumed so far.
    Digest finish() const;

    const Accumulator& accumulator() const { return acc_; }
    const NilsimsaParams& params() const { return params_; }

private:
    void consume_classic(uint8_t byte);
    void consume_generalized(uint8_t byte);

    NilsimsaParams params_;
    std::string params_id_;
    Accumulator acc_;
    // Most recent byte first; classic keeps 4, generalized keeps window_size.
    std::vector<uint8_t> window_;
    size_t window_fill_ = 0;
    uint64_t consumed_ = 0;
    std::vector<uint8_t> gram_;
    std::vector<int> positions_;
};

/// One-shot digest of a whole stream.
Digest digest(std::span<const uint8_t> stream, const NilsimsaParams& params);
Digest digest(const std::vector<uint8_t>& stream, const NilsimsaParams& params);

/// Bitwise agreement score. Throws incompatibility_error when the two
/// digests come from different parameter points.
SimilarityScore similarity(const Digest& a, const Digest& b);

} // namespace lsifr
