#include "lsifr/corpus.hpp"

#include <algorithm>

#include "lsifr/errors.hpp"
#include "lsifr/flow.hpp"
#include "lsifr/pcap.hpp"

namespace lsifr {

std::map<std::string, std::vector<size_t>> LabeledCorpus::by_label() const {
    std::map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < items.size(); ++i) groups[items[i].label].push_back(i);
    return groups;
}

LabeledCorpus load_corpus_dir(const std::filesystem::path& dir) {
    const auto map_path = dir / "devicemap.csv";
    if (!std::filesystem::exists(map_path)) {
        throw format_error("corpus directory lacks devicemap.csv: " + dir.string());
    }
    const DeviceMap dmap = DeviceMap::load_csv(map_path);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pcap") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    LabeledCorpus corpus;
    for (const auto& file : files) {
        const auto packets = read_capture(file);
        const std::string stem = file.stem().string();
        const ExtractResult extracted = extract_flows(packets, dmap, std::nullopt, stem);
        for (const Flow& flow : extracted.flows) {
            CorpusItem item;
            item.label = flow.device_label;
            item.bytes = flow_bytes(flow);
            item.source_id =
                extracted.flows.size() > 1 ? stem + ":" + flow.device_label : stem;
            corpus.items.push_back(std::move(item));
        }
    }
    return corpus;
}

} // namespace lsifr
