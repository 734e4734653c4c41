#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lsifr {

constexpr uint32_t kPcapMagicMicros = 0xA1B2C3D4u;
constexpr uint32_t kLinkTypeEthernet = 1;

/// One captured link-layer frame.
struct Packet {
    uint32_t ts_sec = 0;
    uint32_t ts_usec = 0;
    uint32_t link_type = kLinkTypeEthernet;
    std::vector<uint8_t> raw;

    double timestamp() const { return static_cast<double>(ts_sec) + ts_usec * 1e-6; }
};

/// Reads a classic pcap file (either byte order of the 0xa1b2c3d4 magic).
/// Throws format_error on a bad header or a truncated record.
std::vector<Packet> read_capture(const std::filesystem::path& path);

/// Writes a classic pcap file, little-endian, microsecond timestamps,
/// Ethernet link type.
void write_capture_frames(const std::vector<Packet>& packets, const std::filesystem::path& path);

} // namespace lsifr
