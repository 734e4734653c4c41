#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "lsifr/corpus.hpp"
#include "lsifr/flow.hpp"

namespace lsifr {

/// Blueprint for one synthetic device: a fixed byte template plus a
/// per-byte mutation probability that dials intra-device similarity.
struct DeviceProfile {
    std::string label;
    MacAddress mac{};
    std::vector<uint8_t> template_bytes;
    double mutation_rate = 0.05;
    std::pair<uint16_t, uint16_t> packet_len_range{64, 160};
};

/// Deterministic profiles with pairwise-distinct templates and MACs.
std::vector<DeviceProfile> generate_profiles(int count, uint64_t seed, double mutation_rate = 0.05,
                                             std::pair<uint16_t, uint16_t> packet_len_range = {64,
                                                                                               160});

/// One flow of Ethernet/IPv4/UDP frames whose payloads are independently
/// mutated copies of the profile template.
Flow generate_flow(const DeviceProfile& profile, int packets, uint64_t seed);

/// Writes the flows' frames to one classic pcap file. Throws
/// constraint_error on an empty flow list.
void write_capture(const std::vector<Flow>& flows, const std::filesystem::path& path);

struct SynthCorpusOptions {
    int devices = 23;
    int flows_per_device = 20;
    int packets_per_flow = 8;
    double mutation_rate = 0.05;
    uint64_t seed = 1;
    std::pair<uint16_t, uint16_t> packet_len_range{64, 160};
};

/// Writes devicemap.csv plus one capture per (device, measurement) into
/// the directory, creating it if needed.
void write_synth_corpus(const SynthCorpusOptions& options, const std::filesystem::path& dir);

/// In-memory equivalent of writing the corpus and loading it back:
/// identical labels, streams, and ordering.
LabeledCorpus generate_corpus(const SynthCorpusOptions& options);

} // namespace lsifr
