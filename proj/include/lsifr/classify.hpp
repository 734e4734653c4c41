#pragma once

#include <map>
#include <string>

#include "lsifr/digest.hpp"
#include "lsifr/sigdb.hpp"

namespace lsifr {

inline constexpr const char* kUnknownLabel = "UNKNOWN";

/// When a prediction is demoted to UNKNOWN. `global` compares the best
/// average score against a fixed floor; `per_device` derives the floor of
/// the winning label from the spread of its own signatures.
struct ThresholdPolicy {
    enum class Kind { None, Global, PerDevice };

    Kind kind = Kind::None;
    double global_value = 0.0;  // normalized score floor
    double per_device_k = 2.0;  // sigma multiplier

    std::string to_string() const;
    /// Accepts "none", "global:<value>", "per-device:<k>".
    static ThresholdPolicy parse(const std::string& text);
};

/// Result of identifying one digest against a store.
struct Identification {
    std::string predicted;  // device label or UNKNOWN
    double best_score = 0.0;
    std::map<std::string, double> per_device;
    std::string policy;

    std::string to_json() const;
};

/// Per-label arithmetic mean of normalized similarity between the digest
/// and that label's stored signatures.
std::map<std::string, double> device_scores(const Digest& d, const SignatureStore& store);

/// Label floor mean(intra) - k*std(intra) over the pairwise normalized
/// similarities among the label's own signatures, clamped to [0,1].
/// Requires at least two signatures.
double device_threshold(const std::string& label, const SignatureStore& store, double k);

/// Picks the label with the highest average similarity (lexicographically
/// smallest on ties), then applies the threshold policy.
Identification identify(const Digest& d, const SignatureStore& store,
                        const ThresholdPolicy& policy);

} // namespace lsifr
