#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lsifr/digest.hpp"

namespace lsifr {

/// One labeled signature row.
struct SignatureRecord {
    std::string label;
    std::string source_id;
    Digest digest;
};

/// Append-only database of labeled digests for one parameter point.
/// Adding or removing a device never touches other records, so the
/// database updates without any retraining step.
class SignatureStore {
public:
    explicit SignatureStore(std::string params_id);

    /// Appends a record. Throws incompatibility_error when the record's
    /// digest belongs to a different parameter point, constraint_error on
    /// an empty label.
    void add(SignatureRecord record);

    /// Digests of one label in insertion order; unknown labels yield an
    /// empty list.
    std::vector<Digest> query_by_label(const std::string& label) const;

    /// Sorted unique labels.
    std::vector<std::string> labels() const;

    /// Deletes every record of the label.
    void remove_label(const std::string& label);

    void save(const std::filesystem::path& path) const;
    static SignatureStore load(const std::filesystem::path& path);

    const std::string& params_id() const { return params_id_; }
    const std::vector<SignatureRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

private:
    std::string params_id_;
    std::vector<SignatureRecord> records_;
};

} // namespace lsifr
