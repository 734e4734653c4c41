#include "lsifr/sigdb.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lsifr/errors.hpp"

namespace lsifr {

namespace {
constexpr const char* kFileMagic = "LSIFR-SIGDB";
constexpr const char* kFileVersion = "v1";
} // namespace

SignatureStore::SignatureStore(std::string params_id) : params_id_(std::move(params_id)) {
    // Normalizes and validates the identity up front.
    params_id_ = parse_params(params_id_).canonical_id();
}

void SignatureStore::add(SignatureRecord record) {
    if (record.label.empty()) throw constraint_error("signature record has an empty label");
    if (record.digest.params_id() != params_id_) {
        throw incompatibility_error("signature store holds " + params_id_ +
                                    " digests, got " + record.digest.params_id());
    }
    records_.push_back(std::move(record));
}

std::vector<Digest> SignatureStore::query_by_label(const std::string& label) const {
    std::vector<Digest> out;
    for (const auto& r : records_) {
        if (r.label == label) out.push_back(r.digest);
    }
    return out;
}

std::vector<std::string> SignatureStore::labels() const {
    std::set<std::string> unique;
    for (const auto& r : records_) unique.insert(r.label);
    return {unique.begin(), unique.end()};
}

void SignatureStore::remove_label(const std::string& label) {
    std::erase_if(records_, [&](const SignatureRecord& r) { return r.label == label; });
}

void SignatureStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw error("cannot write signature store: " + path.string());
    out << kFileMagic << ' ' << kFileVersion << ' ' << params_id_ << '\n';
    for (const auto& r : records_) {
        out << r.label << '\t' << r.source_id << '\t' << r.digest.to_hex() << '\n';
    }
    if (!out) throw error("write failed: " + path.string());
}

SignatureStore SignatureStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open signature store: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw format_error("signature store is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream header(line);
    std::string magic, version, params_id;
    header >> magic >> version >> params_id;
    if (magic != kFileMagic) {
        throw format_error("not a signature store (bad magic) at line 1: " + path.string());
    }
    if (version != kFileVersion) {
        throw format_error("unsupported signature store version '" + version + "' at line 1");
    }
    if (params_id.empty()) throw format_error("signature store header lacks a params id at line 1");

    SignatureStore store(params_id);
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t tab1 = line.find('\t');
        const size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw format_error("malformed signature record at line " + std::to_string(line_no));
        }
        std::string label = line.substr(0, tab1);
        std::string source_id = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::string hex = line.substr(tab2 + 1);
        try {
            Digest d = Digest::from_hex(hex, store.params_id());
            store.add(SignatureRecord{std::move(label), std::move(source_id), std::move(d)});
        } catch (const error& e) {
            throw format_error("bad signature record at line " + std::to_string(line_no) + ": " +
                               e.what());
        }
    }
    return store;
}

} // namespace lsifr
