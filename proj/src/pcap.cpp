#include "lsifr/pcap.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

uint32_t swap32(uint32_t v) {
    return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) | ((v & 0x00FF0000u) >> 8) |
           ((v & 0xFF000000u) >> 24);
}

uint16_t swap16(uint16_t v) { return static_cast<uint16_t>((v << 8) | (v >> 8)); }

template <typename T>
T read_le(const uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        if constexpr (sizeof(T) == 4) v = swap32(v);
        if constexpr (sizeof(T) == 2) v = swap16(v);
    }
    return v;
}

void write_le32(std::ofstream& out, uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = swap32(v);
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_le16(std::ofstream& out, uint16_t v) {
    if constexpr (std::endian::native == std::endian::big) v = swap16(v);
    out.write(reinterpret_cast<const char*>(&v), 2);
}

} // namespace

std::vector<Packet> read_capture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open capture file: " + path.string());
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 24) throw format_error("capture file too short for a pcap header: " + path.string());

    const uint32_t magic = read_le<uint32_t>(data.data());
    bool swapped = false;
    if (magic == kPcapMagicMicros) {
        swapped = false;
    } else if (magic == swap32(kPcapMagicMicros)) {
        swapped = true;
    } else {
        throw format_error("not a classic pcap file (bad magic): " + path.string());
    }
    auto u32 = [&](size_t off) {
        uint32_t v = read_le<uint32_t>(data.data() + off);
        return swapped ? swap32(v) : v;
    };
    const uint32_t link_type = u32(20);

    std::vector<Packet> packets;
    size_t off = 24;
    size_t index = 0;
    while (off < data.size()) {
        if (off + 16 > data.size()) {
            throw format_error("truncated pcap record header at record " + std::to_string(index) +
                               " in " + path.string());
        }
        Packet pkt;
        pkt.ts_sec = u32(off);
        pkt.ts_usec = u32(off + 4);
        const uint32_t incl_len = u32(off + 8);
        off += 16;
        if (off + incl_len > data.size()) {
            throw format_error("truncated pcap record body at record " + std::to_string(index) +
                               " in " + path.string());
        }
        pkt.link_type = link_type;
        pkt.raw.assign(data.begin() + static_cast<std::ptrdiff_t>(off),
                       data.begin() + static_cast<std::ptrdiff_t>(off + incl_len));
        off += incl_len;
        packets.push_back(std::move(pkt));
        ++index;
    }
    return packets;
}

void write_capture_frames(const std::vector<Packet>& packets, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open capture file for writing: " + path.string());
    write_le32(out, kPcapMagicMicros);
    write_le16(out, 2); // version major
    write_le16(out, 4); // version minor
    write_le32(out, 0); // thiszone
    write_le32(out, 0); // sigfigs
    write_le32(out, 65535);
    write_le32(out, kLinkTypeEthernet);
    for (const Packet& pkt : packets) {
        write_le32(out, pkt.ts_sec);
        write_le32(out, pkt.ts_usec);
        write_le32(out, static_cast<uint32_t>(pkt.raw.size()));
        write_le32(out, static_cast<uint32_t>(pkt.raw.size()));
        out.write(reinterpret_cast<const char*>(pkt.raw.data()),
                  static_cast<std::streamsize>(pkt.raw.size()));
    }
    if (!out) throw error("write failed: " + path.string());
}

} // namespace lsifr
