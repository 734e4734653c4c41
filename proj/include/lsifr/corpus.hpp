#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lsifr {

/// One measurement: the anonymized byte stream of a device's flow.
struct CorpusItem {
    std::string label;
    std::vector<uint8_t> bytes;
    std::string source_id;
};

struct LabeledCorpus {
    std::vector<CorpusItem> items;

    /// Item indices grouped by label, labels sorted.
    std::map<std::string, std::vector<size_t>> by_label() const;
    size_t size() const { return items.size(); }
};

///// Loads a corpus directory: a devicemap.csv plus any number of classic
/// pcap files, each treated as one capture interval. Files are processed
/// in sorted name order so the item order is stable.
LabeledCorpus load_corpus_dir(const std::filesystem::path& dir);

} // namespace lsifr
