#include "lsifr/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "lsifr/errors.hpp"

namespace lsifr {

std::string ThresholdPolicy::to_string() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Global: out << "global:" << global_value; break;
        case Kind::PerDevice: out << "per-device:" << per_device_k; break;
    }
    return out.str();
}

ThresholdPolicy ThresholdPolicy::parse(const std::string& text) {
    ThresholdPolicy policy;
    if (text == "none" || text.empty()) {
        policy.kind = Kind::None;
        return policy;
    }
    const size_t colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "global") {
            policy.kind = Kind::Global;
            policy.global_value = std::stod(arg);
            if (policy.global_value < 0.0 || policy.global_value > 1.0) {
                throw constraint_error("global threshold must lie in [0,1]");
            }
            return policy;
        }
        if (head == "per-device") {
            policy.kind = Kind::PerDevice;
            if (!arg.empty()) policy.per_device_k = std::stod(arg);
            if (policy.per_device_k < 0.0) {
                throw constraint_error("per-device multiplier must be non-negative");
            }
            return policy;
        }
    } catch (const std::invalid_argument&) {
        throw format_error("policy argument is not a number: " + text);
    }
    throw format_error("unknown policy (expected none, global:<v>, per-device:<k>): " + text);
}

std::string Identification::to_json() const {
    nlohmann::json j;
    j["predicted"] = predicted;
    j["best_score"] = best_score;
    j["scores"] = per_device;
    j["policy"] = policy;
    return j.dump();
}

std::map<std::string, double> device_scores(const Digest& d, const SignatureStore& store) {
    if (d.params_id() != store.params_id()) {
        throw incompatibility_error("digest " + d.params_id() + " queried against store " +
                                    store.params_id());
    }
    std::map<std::string, double> sums;
    std::map<std::string, size_t> counts;
    for (const auto& record : store.records()) {
        sums[record.label] += similarity(d, record.digest).normalized;
        counts[record.label] += 1;
    }
    std::map<std::string, double> averages;
    for (const auto& [label, sum] : sums) {
        averages[label] = sum / static_cast<double>(counts[label]);
    }
    return averages;
}

double device_threshold(const std::string& label, const SignatureStore& store, double k) {
    const std::vector<Digest> sigs = store.query_by_label(label);
    if (sigs.size() < 2) {
        throw data_error("device_threshold: label '" + label + "' has " +
                         std::to_string(sigs.size()) + " signatures, need at least 2");
    }
    std::vector<double> intra;
    intra.reserve(sigs.size() * (sigs.size() - 1) / 2);
    for (size_t i = 0; i < sigs.size(); ++i) {
        for (size_t j = i + 1; j < sigs.size(); ++j) {
            intra.push_back(similarity(sigs[i], sigs[j]).normalized);
        }
    }
    const double n = static_cast<double>(intra.size());
    double mean = 0.0;
    for (double v : intra) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : intra) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / n);
    return std::clamp(mean - k * stddev, 0.0, 1.0);
}

Identification identify(const Digest& d, const SignatureStore& store,
                        const ThresholdPolicy& policy) {
    if (store.empty()) throw data_error("identify: signature store has no records");
    Identification result;
    result.per_device = device_scores(d, store);
    result.policy = policy.to_string();

    // std::map iterates labels in ascending order, so keeping the first
    // strict maximum implements the lexicographic tie-break.
    std::string best_label;
    double best = -1.0;
    for (const auto& [label, score] : result.per_device) {
        if (score > best) {
            best = score;
            best_label = label;
        }
    }
    result.best_score = best;
    result.predicted = best_label;

    switch (policy.kind) {
        case ThresholdPolicy::Kind::None: break;
        case ThresholdPolicy::Kind::Global:
            if (best < policy.global_value) result.predicted = kUnknownLabel;
            break;
        case ThresholdPolicy::Kind::PerDevice:
            if (best < device_threshold(best_label, store, policy.per_device_k)) {
                result.predicted = kUnknownLabel;
            }
            break;
    }
    return result;
}

} // namespace lsifr
