#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsifr/pcap.hpp"

namespace lsifr {

using MacAddress = std::array<uint8_t, 6>;

std::string mac_to_string(const MacAddress& mac);
MacAddress mac_from_string(std::string_view text);

/// Binds device labels to the MAC addresses seen in captures.
/// CSV format: header `label,mac`, one entry per line.
struct DeviceMap {
    struct Entry {
        std::string label;
        MacAddress mac;
    };
    std::vector<Entry> entries;

    const Entry* find_mac(std::span<const uint8_t> mac) const;
    static DeviceMap load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path) const;
};

/// Ordered packets of one device in one capture interval.
struct Flow {
    std::string device_label;
    std::vector<Packet> packets;
    double interval_start = 0.0;
    double interval_end = 0.0;
    std::string source_id;
};

/// Zeroes both MAC addresses of an Ethernet frame and, for IPv4/IPv6
/// payloads, the source and destination IP address fields. Lengths and
/// all other bytes are unchanged. Throws on non-Ethernet link types and
/// frames shorter than the Ethernet header.
Packet anonymize(Packet pkt);
void anonymize_in_place(Packet& pkt);

struct ExtractResult {
    std::vector<Flow> flows;
    size_t unmatched_packets = 0;
    size_t total_packets = 0;
};

/// Assigns each packet to the mapped device of its source MAC (or its
/// destination MAC when only that one is mapped), groups per device per
/// interval window, then anonymizes the grouped packets. Without an
/// interval the whole capture is a single window. Flows come out ordered
/// by label, then by window.
ExtractResult extract_flows(const std::vector<Packet>& packets, const DeviceMap& dmap,
                            std::optional<double> interval_seconds = std::nullopt,
                            const std::string& source_id = "");

/// Concatenation of the flow's anonymized frames in capture order.
std::vector<uint8_t> flow_bytes(const Flow& flow);

} // namespace lsifr
