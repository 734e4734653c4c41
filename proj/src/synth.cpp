#include "lsifr/synth.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>

#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

constexpr MacAddress kGatewayMac = {0x02, 0xFF, 0x00, 0x00, 0x00, 0x01};
constexpr uint32_t kBaseTimestamp = 1600000000;

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1) + 0xBF58476D1CE4E5B9ull * (c + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint32_t uniform_below(std::mt19937_64& rng, uint32_t bound) {
    return static_cast<uint32_t>(rng() % bound);
}

std::string padded_label(const char* prefix, int index, int width) {
    std::ostringstream out;
    out << prefix << std::setw(width) << std::setfill('0') << index;
    return out.str();
}

int pad_width(int count) {
    int width = 1;
    for (int v = count - 1; v >= 10; v /= 10) ++width;
    return std::max(width, 2);
}

void append_u16_be(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

uint16_t ipv4_checksum(std::span<const uint8_t> header) {
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < header.size(); i += 2) {
        sum += static_cast<uint32_t>((header[i] << 8) | header[i + 1]);
    }
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<uint16_t>(~sum & 0xFFFF);
}

std::vector<uint8_t> build_frame(const DeviceProfile& profile, uint16_t packet_id,
                                 std::span<const uint8_t> payload) {
    std::vector<uint8_t> frame;
    frame.reserve(42 + payload.size());
    frame.insert(frame.end(), kGatewayMac.begin(), kGatewayMac.end());
    frame.insert(frame.end(), profile.mac.begin(), profile.mac.end());
    append_u16_be(frame, 0x0800);

    const uint16_t ip_total = static_cast<uint16_t>(20 + 8 + payload.size());
    std::vector<uint8_t> ip;
    ip.reserve(20);
    ip.push_back(0x45);
    ip.push_back(0x00);
    append_u16_be(ip, ip_total);
    append_u16_be(ip, packet_id);
    append_u16_be(ip, 0x0000);
    ip.push_back(64); // TTL
    ip.push_back(17); // UDP
    append_u16_be(ip, 0x0000); // checksum placeholder
    ip.push_back(10);
    ip.push_back(0);
    ip.push_back(profile.mac[4]);
    ip.push_back(profile.mac[5]);
    ip.push_back(10);
    ip.push_back(0);
    ip.push_back(0);
    ip.push_back(1);
    const uint16_t checksum = ipv4_checksum(ip);
    ip[10] = static_cast<uint8_t>(checksum >> 8);
    ip[11] = static_cast<uint8_t>(checksum & 0xFF);
    frame.insert(frame.end(), ip.begin(), ip.end());

    append_u16_be(frame, 49152);
    append_u16_be(frame, 443);
    append_u16_be(frame, static_cast<uint16_t>(8 + payload.size()));
    append_u16_be(frame, 0x0000);

    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

} // namespace

std::vector<DeviceProfile> generate_profiles(int count, uint64_t seed, double mutation_rate,
                                             std::pair<uint16_t, uint16_t> packet_len_range) {
    if (count < 1) throw constraint_error("generate_profiles: count must be >= 1");
    if (mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw constraint_error("generate_profiles: mutation_rate must lie in [0,1]");
    }
    if (packet_len_range.first > packet_len_range.second || packet_len_range.first == 0) {
        throw constraint_error("generate_profiles: bad packet length range");
    }
    const int width = pad_width(count);
    std::vector<DeviceProfile> profiles;
    profiles.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        DeviceProfile p;
        p.label = padded_label("device-", i, width);
        p.mac = {0x02, 0x00, 0x00, 0x00, static_cast<uint8_t>(i >> 8),
                 static_cast<uint8_t>(i & 0xFF)};
        p.mutation_rate = mutation_rate;
        p.packet_len_range = packet_len_range;
        std::mt19937_64 rng(mix_seed(seed, 0x7E4D, static_cast<uint64_t>(i)));
        p.template_bytes.resize(packet_len_range.second);
        for (auto& b : p.template_bytes) b = static_cast<uint8_t>(rng() & 0xFF);
        profiles.push_back(std::move(p));
    }
    return profiles;
}

Flow generate_flow(const DeviceProfile& profile, int packets, uint64_t seed) {
    if (packets < 1) throw constraint_error("generate_flow: packets must be >= 1");
    std::mt19937_64 rng(seed);
    Flow flow;
    flow.device_label = profile.label;
    flow.packets.reserve(static_cast<size_t>(packets));
    const auto [len_min, len_max] = profile.packet_len_range;
    std::vector<uint8_t> payload;
    for (int i = 0; i < packets; ++i) {
        const uint16_t len =
            static_cast<uint16_t>(len_min + uniform_below(rng, len_max - len_min + 1u));
        payload.assign(profile.template_bytes.begin(), profile.template_bytes.begin() + len);
        for (auto& b : payload) {
            if (uniform01(rng) < profile.mutation_rate) b = static_cast<uint8_t>(rng() & 0xFF);
        }
        Packet pkt;
        const uint64_t micros = static_cast<uint64_t>(i) * 10000;
        pkt.ts_sec = kBaseTimestamp + static_cast<uint32_t>(micros / 1000000);
        pkt.ts_usec = static_cast<uint32_t>(micros % 1000000);
        pkt.link_type = kLinkTypeEthernet;
        pkt.raw = build_frame(profile, static_cast<uint16_t>(i), payload);
        flow.packets.push_back(std::move(pkt));
    }
    flow.interval_start = flow.packets.front().timestamp();
    flow.interval_end = flow.packets.back().timestamp();
    return flow;
}

void write_capture(const std::vector<Flow>& flows, const std::filesystem::path& path) {
    if (flows.empty()) throw constraint_error("write_capture: no flows");
    std::vector<Packet> frames;
    for (const Flow& flow : flows) {
        frames.insert(frames.end(), flow.packets.begin(), flow.packets.end());
    }
    write_capture_frames(frames, path);
}

void write_synth_corpus(const SynthCorpusOptions& options, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto profiles = generate_profiles(options.devices, options.seed, options.mutation_rate,
                                            options.packet_len_range);
    DeviceMap dmap;
    for (const auto& p : profiles) dmap.entries.push_back({p.label, p.mac});
    dmap.save_csv(dir / "devicemap.csv");

    const int flow_width = pad_width(options.flows_per_device);
    for (size_t d = 0; d < profiles.size(); ++d) {
        for (int j = 0; j < options.flows_per_device; ++j) {
            Flow flow = generate_flow(profiles[d], options.packets_per_flow,
                                      mix_seed(options.seed, d, static_cast<uint64_t>(j)));
            const std::string name =
                profiles[d].label + "-m" + padded_label("", j, flow_width) + ".pcap";
            write_capture({flow}, dir / name);
        }
    }
}

LabeledCorpus generate_corpus(const SynthCorpusOptions& options) {
    const auto profiles = generate_profiles(options.devices, options.seed, options.mutation_rate,
                                            options.packet_len_range);
    const int flow_width = pad_width(options.flows_per_device);
    LabeledCorpus corpus;
    for (size_t d = 0; d < profiles.size(); ++d) {
        for (int j = 0; j < options.flows_per_device; ++j) {
            Flow flow = generate_flow(profiles[d], options.packets_per_flow,
                                      mix_seed(options.seed, d, static_cast<uint64_t>(j)));
            for (Packet& pkt : flow.packets) anonymize_in_place(pkt);
            CorpusItem item;
            item.label = profiles[d].label;
            item.bytes = flow_bytes(flow);
            item.source_id = profiles[d].label + "-m" + padded_label("", j, flow_width);
            corpus.items.push_back(std::move(item));
        }
    }
    return corpus;
}

} // namespace lsifr
