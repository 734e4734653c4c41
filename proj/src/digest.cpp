#include "lsifr/digest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "lsifr/bucket_hash.hpp"
#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

double percentile(const std::vector<double>& sorted, double q) {
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

Digest::Digest(std::vector<uint8_t> packed_bits, std::string params_id)
    : bytes_(std::move(packed_bits)), params_id_(std::move(params_id)) {}

std::string Digest::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (uint8_t b : bytes_) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

Digest Digest::from_hex(std::string_view hex, const std::string& params_id) {
    const NilsimsaParams p = parse_params(params_id);
    const size_t expected = static_cast<size_t>(p.accumulator_size) / 4;
    if (hex.size() != expected) {
        throw format_error("digest hex has " + std::to_string(hex.size()) + " characters, expected " +
                           std::to_string(expected) + " for " + params_id);
    }
    std::vector<uint8_t> bytes(hex.size() / 2);
    for (size_t i = 0; i < bytes.size(); ++i) {
        const int hi = hex_nibble(hex[2 * i]);
        const int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw format_error("digest hex has a non-hex character");
        bytes[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return Digest(std::move(bytes), p.canonical_id());
}

double threshold_statistic(std::span<const double> ratios, ThresholdKind kind) {
    if (ratios.empty()) throw data_error("threshold_statistic: empty input");
    const double n = static_cast<double>(ratios.size());
    switch (kind) {
        case ThresholdKind::Mean:
            return std::accumulate(ratios.begin(), ratios.end(), 0.0) / n;
        case ThresholdKind::Mode: {
            std::map<double, size_t> freq;
            for (double r : ratios) ++freq[r];
            size_t best = 0;
            double value = ratios[0];
            for (const auto& [r, count] : freq) {
                if (count > best) {
                    best = count;
                    value = r;
                }
            }
            return value;
        }
        case ThresholdKind::Std: {
            const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / n;
            double ss = 0.0;
            for (double r : ratios) ss += (r - mean) * (r - mean);
            return std::sqrt(ss / n);
        }
        default: break;
    }
    std::vector<double> sorted(ratios.begin(), ratios.end());
    std::sort(sorted.begin(), sorted.end());
    switch (kind) {
        case ThresholdKind::Median: return percentile(sorted, 0.5);
        case ThresholdKind::Q1: return percentile(sorted, 0.25);
        case ThresholdKind::Q3: return percentile(sorted, 0.75);
        case ThresholdKind::Iqr: return percentile(sorted, 0.75) - percentile(sorted, 0.25);
        default: throw constraint_error("unhandled threshold kind");
    }
}

std::vector<std::vector<uint8_t>> window_ngrams(std::span<const uint8_t> window, int n) {
    if (n <= 0) throw constraint_error("window_ngrams: n must be positive");
    if (static_cast<size_t>(n) >= window.size()) {
        throw constraint_error("window_ngrams: n must be less than the window length");
    }
    std::vector<std::vector<uint8_t>> grams;
    std::vector<size_t> pos(n);
    for (int i = 0; i < n; ++i) pos[i] = static_cast<size_t>(i);
    const size_t m = window.size();
    const size_t k = static_cast<size_t>(n);
    while (true) {
        std::vector<uint8_t> gram(k);
        for (size_t i = 0; i < k; ++i) gram[i] = window[pos[i]];
        grams.push_back(std::move(gram));
        size_t i = k;
        while (i > 0 && pos[i - 1] == m - k + (i - 1)) --i;
        if (i == 0) break;
        ++pos[i - 1];
        for (size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
    return grams;
}

std::vector<bool> threshold_bits(std::span<const uint64_t> counts, ThresholdKind kind) {
    std::vector<bool> bits(counts.size(), false);
    if (counts.empty()) return bits;
    const uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
    if (total == 0) return bits;
    const double mean_count = static_cast<double>(total) / static_cast<double>(counts.size());
    std::vector<double> ratios(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        ratios[i] = static_cast<double>(counts[i]) / mean_count;
    }
    const double stat = threshold_statistic(ratios, kind);
    for (size_t i = 0; i < counts.size(); ++i) bits[i] = ratios[i] > stat;
    return bits;
}

Digester::Digester(const NilsimsaParams& params)
    : params_(params),
      params_id_(params.canonical_id()),
      acc_(static_cast<size_t>(params.accumulator_size)) {
    validate_params_or_throw(params_);
    window_.assign(params_.mode == Mode::Classic ? 4 : static_cast<size_t>(params_.window_size), 0);
    gram_.reserve(static_cast<size_t>(params_.ngram_size));
    positions_.reserve(static_cast<size_t>(params_.ngram_size));
}

void Digester::update(std::span<const uint8_t> data) {
    if (params_.mode == Mode::Classic) {
        for (uint8_t b : data) consume_classic(b);
    } else {
        for (uint8_t b : data) consume_generalized(b);
    }
}

void Digester::update(const void* data, size_t size) {
    update(std::span<const uint8_t>(static_cast<const uint8_t*>(data), size));
}

// Original Nilsimsa schedule: eight salted trigrams per byte once the
// four-byte history is full, fewer while it is filling.
void Digester::consume_classic(uint8_t ch) {
    const auto& w = window_;
    if (window_fill_ > 1) {
        acc_.add(tran53_trigram(ch, w[0], w[1], 0));
    }
    if (window_fill_ > 2) {
        acc_.add(tran53_trigram(ch, w[0], w[2], 1));
        acc_.add(tran53_trigram(ch, w[1], w[2], 2));
    }
    if (window_fill_ > 3) {
        acc_.add(tran53_trigram(ch, w[0], w[3], 3));
        acc_.add(tran53_trigram(ch, w[1], w[3], 4));
        acc_.add(tran53_trigram(ch, w[2], w[3], 5));
        acc_.add(tran53_trigram(w[3], w[0], ch, 6));
        acc_.add(tran53_trigram(w[3], w[2], ch, 7));
    }
    for (size_t i = std::min<size_t>(window_fill_, 3); i > 0; --i) window_[i] = window_[i - 1];
    window_[0] = ch;
    if (window_fill_ < 4) ++window_fill_;
}

// Emits every order-preserving n-subsequence of the current window.
// While the stream is shorter than the window size, the whole prefix acts
// as the window, so emission starts as soon as n bytes have arrived.
void Digester::consume_generalized(uint8_t ch) {
    const size_t w = static_cast<size_t>(params_.window_size);
    if (window_fill_ < w) {
        window_[window_fill_++] = ch;
    } else {
        std::memmove(window_.data(), window_.data() + 1, w - 1);
        window_[w - 1] = ch;
    }
    const size_t m = window_fill_;
    const size_t n = static_cast<size_t>(params_.ngram_size);
    if (m < n) return;
    const auto accumulator_size = static_cast<uint32_t>(params_.accumulator_size);
    positions_.resize(n);
    for (size_t i = 0; i < n; ++i) positions_[i] = static_cast<int>(i);
    gram_.resize(n);
    while (true) {
        for (size_t i = 0; i < n; ++i) gram_[i] = window_[static_cast<size_t>(positions_[i])];
        acc_.add(bucket_index(gram_, params_.hash_kind, accumulator_size));
        size_t i = n;
        while (i > 0 && positions_[i - 1] == static_cast<int>(m - n + (i - 1))) --i;
        if (i == 0) break;
        ++positions_[i - 1];
        for (size_t j = i; j < n; ++j) positions_[j] = positions_[j - 1] + 1;
    }
}

Digest Digester::finish() const {
    const size_t bit_count = acc_.counts.size();
    std::vector<uint8_t> packed(bit_count / 8, 0);
    if (params_.mode == Mode::Classic) {
        // Reference finalize: integer mean threshold over raw counts, bits
        // laid out from accumulator index 255 downward to match the
        // original digest byte order.
        const uint64_t threshold = acc_.total / 256;
        for (size_t k = 0; k < 256; ++k) {
            if (acc_.counts[255 - k] > threshold) {
                packed[k / 8] |= static_cast<uint8_t>(0x80u >> (k % 8));
            }
        }
    } else if (acc_.total > 0) {
        const std::vector<bool> bits = threshold_bits(acc_.counts, params_.threshold_kind);
        for (size_t i = 0; i < bit_count; ++i) {
            if (bits[i]) packed[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
        }
    }
    return Digest(std::move(packed), params_id_);
}

Digest digest(std::span<const uint8_t> stream, const NilsimsaParams& params) {
    Digester d(params);
    d.update(stream);
    return d.finish();
}

Digest digest(const std::vector<uint8_t>& stream, const NilsimsaParams& params) {
    return digest(std::span<const uint8_t>(stream.data(), stream.size()), params);
}

SimilarityScore similarity(const Digest& a, const Digest& b) {
    if (a.params_id() != b.params_id()) {
        throw incompatibility_error("similarity: digests from different parameter points (" +
                                    a.params_id() + " vs " + b.params_id() + ")");
    }
    const size_t bit_count = a.bit_length();
    size_t differing = 0;
    for (size_t i = 0; i < a.bytes().size(); ++i) {
        differing += static_cast<size_t>(std::popcount(static_cast<uint8_t>(a.bytes()[i] ^ b.bytes()[i])));
    }
    const size_t matching = bit_count - differing;
    SimilarityScore score;
    score.raw = static_cast<int>(matching) - static_cast<int>(bit_count / 2);
    score.normalized = static_cast<double>(matching) / static_cast<double>(bit_count);
    return score;
}

} // namespace lsifr
