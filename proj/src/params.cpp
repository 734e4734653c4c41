#include "lsifr/params.hpp"

#include <array>
#include <sstream>

#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

constexpr std::array<const char*, kHashKindCount> kHashNames = {
    "TRAN53", "SHA512", "SHA384", "SHA256", "SHA224", "SHA1",  "MD5",    "MD4",
    "FNV164", "FNV1A32", "FNV1A64", "MMH3",  "CRC32",  "ADLER32", "WHIRLPOOL",
};

constexpr std::array<const char*, kThresholdKindCount> kThresholdNames = {
    "mean", "median", "mode", "IQR", "Q1", "Q3", "std",
};

} // namespace

std::string to_string(HashKind kind) {
    return kHashNames[static_cast<int>(kind)];
}

std::string to_string(ThresholdKind kind) {
    return kThresholdNames[static_cast<int>(kind)];
}

std::string to_string(Mode mode) {
    return mode == Mode::Classic ? "classic" : "generalized";
}

HashKind hash_kind_from_string(std::string_view name) {
    for (int i = 0; i < kHashKindCount; ++i) {
        if (name == kHashNames[i]) return static_cast<HashKind>(i);
    }
    throw format_error("unknown hash kind: " + std::string(name));
}

ThresholdKind threshold_kind_from_string(std::string_view name) {
    for (int i = 0; i < kThresholdKindCount; ++i) {
        if (name == kThresholdNames[i]) return static_cast<ThresholdKind>(i);
    }
    throw format_error("unknown threshold kind: " + std::string(name));
}

Mode mode_from_string(std::string_view name) {
    if (name == "classic") return Mode::Classic;
    if (name == "generalized") return Mode::Generalized;
    throw format_error("unknown mode: " + std::string(name));
}

std::string NilsimsaParams::canonical_id() const {
    std::ostringstream out;
    out << "w=" << window_size << ",n=" << ngram_size << ",h=" << to_string(hash_kind)
        << ",a=" << accumulator_size << ",t=" << to_string(threshold_kind)
        << ",m=" << to_string(mode);
    return out.str();
}

NilsimsaParams classic_params() {
    return NilsimsaParams{5, 3, HashKind::TRAN53, 256, ThresholdKind::Median, Mode::Classic};
}

NilsimsaParams default_generalized_params() {
    return NilsimsaParams{5, 3, HashKind::TRAN53, 256, ThresholdKind::Median, Mode::Generalized};
}

std::vector<std::string> validate_params(const NilsimsaParams& p) {
    std::vector<std::string> violations;
    if (p.window_size < 5 || p.window_size > 10) {
        violations.push_back("window_size not in {5,6,7,8,9,10}");
    }
    if (p.ngram_size != 3 && p.ngram_size != 5 && p.ngram_size != 7 && p.ngram_size != 9) {
        violations.push_back("ngram_size not in {3,5,7,9}");
    }
    if (p.ngram_size >= p.window_size) {
        violations.push_back("ngram_size must be < window_size");
    }
    if (p.accumulator_size < 16 || p.accumulator_size > 1024 || p.accumulator_size % 16 != 0) {
        violations.push_back("accumulator_size not a multiple of 16 in [16,1024]");
    }
    if (p.mode == Mode::Classic && !(p.window_size == 5 && p.ngram_size == 3 &&
                                     p.hash_kind == HashKind::TRAN53 && p.accumulator_size == 256 &&
                                     p.threshold_kind == ThresholdKind::Median)) {
        violations.push_back(
            "classic mode requires the defaults w=5,n=3,h=TRAN53,a=256,t=median");
    }
    return violations;
}

void validate_params_or_throw(const NilsimsaParams& p) {
    auto violations = validate_params(p);
    if (violations.empty()) return;
    std::string msg = "invalid params " + p.canonical_id() + ":";
    for (const auto& v : violations) msg += " " + v + ";";
    throw constraint_error(msg);
}

NilsimsaParams parse_params(std::string_view text) {
    NilsimsaParams p = default_generalized_params();
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        std::string_view field = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - pos);
        pos = comma == std::string_view::npos ? text.size() : comma + 1;
        if (field.empty()) continue;
        size_t eq = field.find('=');
        if (eq == std::string_view::npos) {
            throw format_error("params field missing '=': " + std::string(field));
        }
        std::string_view key = field.substr(0, eq);
        std::string_view value = field.substr(eq + 1);
        auto as_int = [&](std::string_view v) {
            try {
                size_t used = 0;
                int n = std::stoi(std::string(v), &used);
                if (used != v.size()) throw std::invalid_argument("trailing");
                return n;
            } catch (const std::exception&) {
                throw format_error("params value not an integer: " + std::string(field));
            }
        };
        if (key == "w") {
            p.window_size = as_int(value);
        } else if (key == "n") {
            p.ngram_size = as_int(value);
        } else if (key == "h") {
            p.hash_kind = hash_kind_from_string(value);
        } else if (key == "a") {
            p.accumulator_size = as_int(value);
        } else if (key == "t") {
            p.threshold_kind = threshold_kind_from_string(value);
        } else if (key == "m") {
            p.mode = mode_from_string(value);
        } else {
            throw format_error("unknown params key: " + std::string(key));
        }
    }
    validate_params_or_throw(p);
    return p;
}

} // namespace lsifr
