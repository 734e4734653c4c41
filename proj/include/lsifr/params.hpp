#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lsifr {

/// Bucket hash families selectable for the n-gram stage.
enum class HashKind {
    TRAN53,
    SHA512,
    SHA384,
    SHA256,
    SHA224,
    SHA1,
    MD5,
    MD4,
    FNV164,
    FNV1A32,
    FNV1A64,
    MMH3,
    CRC32,
    ADLER32,
    WHIRLPOOL,
};

/// Statistics selectable for the bit threshold over bucket ratios.
enum class ThresholdKind {
    Mean,
    Median,
    Mode,
    Iqr,
    Q1,
    Q3,
    Std,
};

/// Classic reproduces the original Nilsimsa schedule bit-exactly;
/// generalized emits every order-preserving n-subsequence per window.
enum class Mode {
    Classic,
    Generalized,
};

constexpr int kHashKindCount = 15;
constexpr int kThresholdKindCount = 7;

std::string to_string(HashKind kind);
std::string to_string(ThresholdKind kind);
std::string to_string(Mode mode);
HashKind hash_kind_from_string(std::string_view name);
ThresholdKind threshold_kind_from_string(std::string_view name);
Mode mode_from_string(std::string_view name);

/// One point in the tunable digest parameter grid.
struct NilsimsaParams {
    int window_size = 5;
    int ngram_size = 3;
    HashKind hash_kind = HashKind::TRAN53;
    int accumulator_size = 256;
    ThresholdKind threshold_kind = ThresholdKind::Median;
    Mode mode = Mode::Generalized;

    /// Canonical identity string:
    /// w=<int>,n=<int>,h=<HASH>,a=<int>,t=<threshold>,m=<classic|generalized>
    std::string canonical_id() const;

    /// Strict equality on all six fields.
    bool operator==(const NilsimsaParams&) const = default;
};

/// Classic Nilsimsa defaults (the only valid classic-mode configuration).
NilsimsaParams classic_params();

/// Default grid point in generalized mode.
NilsimsaParams default_generalized_params();

/// Returns one message per violated constraint; empty means valid.
std::vector<std::string> validate_params(const NilsimsaParams& p);

/// Throws constraint_error listing every violation, if any.
void validate_params_or_throw(const NilsimsaParams& p);

/// Parses a canonical params string. Keys may appear in any order; missing
/// keys take the generalized defaults. Throws format_error on bad syntax
/// and constraint_error when the parsed point violates the grid.
NilsimsaParams parse_params(std::string_view text);

} // namespace lsifr
