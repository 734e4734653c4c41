#include "lsifr/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

constexpr size_t kEthHeaderLen = 14;
constexpr uint16_t kEtherTypeIpv4 = 0x0800;
constexpr uint16_t kEtherTypeIpv6 = 0x86DD;

uint16_t ether_type(const std::vector<uint8_t>& raw) {
    return static_cast<uint16_t>((raw[12] << 8) | raw[13]);
}

void zero_range(std::vector<uint8_t>& raw, size_t begin, size_t end) {
    end = std::min(end, raw.size());
    for (size_t i = begin; i < end && i < raw.size(); ++i) raw[i] = 0;
}

} // namespace

std::string mac_to_string(const MacAddress& mac) {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                  mac[4], mac[5]);
    return buf;
}

MacAddress mac_from_string(std::string_view text) {
    MacAddress mac{};
    unsigned values[6];
    if (text.size() != 17 ||
        std::sscanf(std::string(text).c_str(), "%2x:%2x:%2x:%2x:%2x:%2x", &values[0], &values[1],
                    &values[2], &values[3], &values[4], &values[5]) != 6) {
        throw format_error("malformed MAC address: " + std::string(text));
    }
    for (int i = 0; i < 6; ++i) mac[static_cast<size_t>(i)] = static_cast<uint8_t>(values[i]);
    return mac;
}

const DeviceMap::Entry* DeviceMap::find_mac(std::span<const uint8_t> mac) const {
    if (mac.size() != 6) return nullptr;
    for (const Entry& e : entries) {
        if (std::equal(e.mac.begin(), e.mac.end(), mac.begin())) return &e;
    }
    return nullptr;
}

DeviceMap DeviceMap::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open device map: " + path.string());
    std::string line;
    if (!std::getline(in, line) || (line != "label,mac" && line != "label,mac\r")) {
        throw format_error("device map must start with header 'label,mac': " + path.string());
    }
    DeviceMap dmap;
    std::set<std::string> labels;
    std::set<std::string> macs;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw format_error("device map line " + std::to_string(line_no) + " has no comma");
        }
        Entry e;
        e.label = line.substr(0, comma);
        e.mac = mac_from_string(line.substr(comma + 1));
        if (e.label.empty()) {
            throw format_error("device map line " + std::to_string(line_no) + " has an empty label");
        }
        if (!labels.insert(e.label).second) {
            throw format_error("duplicate device label: " + e.label);
        }
        if (!macs.insert(mac_to_string(e.mac)).second) {
            throw format_error("duplicate MAC address: " + mac_to_string(e.mac));
        }
        dmap.entries.push_back(std::move(e));
    }
    return dmap;
}

void DeviceMap::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw error("cannot write device map: " + path.string());
    out << "label,mac\n";
    for (const Entry& e : entries) out << e.label << ',' << mac_to_string(e.mac) << '\n';
}

void anonymize_in_place(Packet& pkt) {
    if (pkt.link_type != kLinkTypeEthernet) {
        throw constraint_error("anonymize: link type " + std::to_string(pkt.link_type) +
                               " is not Ethernet");
    }
    if (pkt.raw.size() < kEthHeaderLen) {
        throw format_error("anonymize: frame shorter than an Ethernet header (" +
                           std::to_string(pkt.raw.size()) + " bytes)");
    }
    zero_range(pkt.raw, 0, 12); // destination + source MAC
    const uint16_t etype = ether_type(pkt.raw);
    if (etype == kEtherTypeIpv4) {
        zero_range(pkt.raw, kEthHeaderLen + 12, kEthHeaderLen + 20);
    } else if (etype == kEtherTypeIpv6) {
        zero_range(pkt.raw, kEthHeaderLen + 8, kEthHeaderLen + 40);
    }
}

Packet anonymize(Packet pkt) {
    anonymize_in_place(pkt);
    return pkt;
}

ExtractResult extract_flows(const std::vector<Packet>& packets, const DeviceMap& dmap,
                            std::optional<double> interval_seconds, const std::string& source_id) {
    if (dmap.entries.empty()) throw constraint_error("extract_flows: empty device map");
    ExtractResult result;
    result.total_packets = packets.size();
    if (packets.empty()) return result;

    const double t0 = packets.front().timestamp();
    // (label, window index) -> packet order positions
    std::map<std::pair<std::string, int64_t>, std::vector<size_t>> groups;
    for (size_t i = 0; i < packets.size(); ++i) {
        const Packet& pkt = packets[i];
        const DeviceMap::Entry* entry = nullptr;
        if (pkt.link_type == kLinkTypeEthernet && pkt.raw.size() >= kEthHeaderLen) {
            // Source MAC decides ownership; the destination only matters when
            // the sender is unmapped. Keeps every packet in exactly one flow.
            entry = dmap.find_mac(std::span<const uint8_t>(pkt.raw.data() + 6, 6));
            if (entry == nullptr) {
                entry = dmap.find_mac(std::span<const uint8_t>(pkt.raw.data(), 6));
            }
        }
        if (entry == nullptr) {
            ++result.unmatched_packets;
            continue;
        }
        int64_t window = 0;
        if (interval_seconds.has_value()) {
            if (*interval_seconds <= 0) {
                throw constraint_error("extract_flows: interval must be positive");
            }
            window = static_cast<int64_t>(std::floor((pkt.timestamp() - t0) / *interval_seconds));
        }
        groups[{entry->label, window}].push_back(i);
    }

    for (const auto& [key, indices] : groups) {
        Flow flow;
        flow.device_label = key.first;
        flow.source_id = source_id;
        if (interval_seconds.has_value()) {
            flow.interval_start = t0 + static_cast<double>(key.second) * *interval_seconds;
            flow.interval_end = flow.interval_start + *interval_seconds;
        } else {
            flow.interval_start = t0;
            flow.interval_end = packets.back().timestamp();
        }
        flow.packets.reserve(indices.size());
        for (size_t i : indices) flow.packets.push_back(anonymize(packets[i]));
        result.flows.push_back(std::move(flow));
    }
    return result;
}

std::vector<uint8_t> flow_bytes(const Flow& flow) {
    std::vector<uint8_t> stream;
    size_t total = 0;
    for (const Packet& pkt : flow.packets) total += pkt.raw.size();
    stream.reserve(total);
    for (const Packet& pkt : flow.packets) {
        stream.insert(stream.end(), pkt.raw.begin(), pkt.raw.end());
    }
    return stream;
}

} // namespace lsifr
