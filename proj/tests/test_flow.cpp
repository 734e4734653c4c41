#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include "lsifr/corpus.hpp"
#include "lsifr/errors.hpp"
#include "lsifr/flow.hpp"
#include "lsifr/pcap.hpp"
#include "lsifr/synth.hpp"

using namespace lsifr;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     (std::string("lsifr_test_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Packet make_ipv4_frame(const MacAddress& src, const MacAddress& dst, uint32_t ts_sec,
                       uint32_t ts_usec, std::vector<uint8_t> payload) {
    Packet pkt;
    pkt.ts_sec = ts_sec;
    pkt.ts_usec = ts_usec;
    pkt.raw.insert(pkt.raw.end(), dst.begin(), dst.end());
    pkt.raw.insert(pkt.raw.end(), src.begin(), src.end());
    pkt.raw.push_back(0x08);
    pkt.raw.push_back(0x00);
    // Minimal IPv4 header: only the address fields matter here.
    std::vector<uint8_t> ip(20, 0);
    ip[0] = 0x45;
    ip[12] = 192; ip[13] = 168; ip[14] = 1; ip[15] = 10;
    ip[16] = 192; ip[17] = 168; ip[18] = 1; ip[19] = 1;
    pkt.raw.insert(pkt.raw.end(), ip.begin(), ip.end());
    pkt.raw.insert(pkt.raw.end(), payload.begin(), payload.end());
    return pkt;
}

} // namespace

TEST_CASE("pcap files round-trip") {
    const auto dir = temp_dir("pcap");
    std::vector<Packet> packets;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 7; ++i) {
        Packet pkt;
        pkt.ts_sec = 1700000000u + static_cast<uint32_t>(i);
        pkt.ts_usec = static_cast<uint32_t>(i * 1000);
        pkt.raw.resize(14 + static_cast<size_t>(rng() % 64));
        for (auto& b : pkt.raw) b = static_cast<uint8_t>(rng() & 0xFF);
        packets.push_back(std::move(pkt));
    }
    const auto path = dir / "sample.pcap";
    write_capture_frames(packets, path);

    // Little-endian classic magic, by direct byte inspection.
    {
        std::ifstream raw(path, std::ios::binary);
        char magic[4];
        raw.read(magic, 4);
        CHECK_EQ(static_cast<uint8_t>(magic[0]), 0xD4);
        CHECK_EQ(static_cast<uint8_t>(magic[1]), 0xC3);
        CHECK_EQ(static_cast<uint8_t>(magic[2]), 0xB2);
        CHECK_EQ(static_cast<uint8_t>(magic[3]), 0xA1);
    }

    const std::vector<Packet> reread = read_capture(path);
    REQUIRE(reread.size() == packets.size());
    for (size_t i = 0; i < packets.size(); ++i) {
        CHECK_EQ(reread[i].ts_sec, packets[i].ts_sec);
        CHECK_EQ(reread[i].ts_usec, packets[i].ts_usec);
        CHECK_EQ(reread[i].link_type, kLinkTypeEthernet);
        CHECK(reread[i].raw == packets[i].raw);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("pcap reader accepts the opposite byte order") {
    const auto dir = temp_dir("pcap_be");
    const auto path = dir / "be.pcap";
    {
        std::ofstream out(path, std::ios::binary);
        const auto be32 = [&](uint32_t v) {
            const uint8_t bytes[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                                      static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
            out.write(reinterpret_cast<const char*>(bytes), 4);
        };
        const auto be16 = [&](uint16_t v) {
            const uint8_t bytes[2] = {static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
            out.write(reinterpret_cast<const char*>(bytes), 2);
        };
        be32(0xA1B2C3D4u);
        be16(2);
        be16(4);
        be32(0);
        be32(0);
        be32(65535);
        be32(1);  // Ethernet
        be32(1700000123u);  // ts_sec
        be32(456u);         // ts_usec
        be32(3u);           // captured length
        be32(3u);           // original length
        out.put('\x0a');
        out.put('\x0b');
        out.put('\x0c');
    }
    const std::vector<Packet> packets = read_capture(path);
    REQUIRE(packets.size() == 1);
    CHECK_EQ(packets[0].ts_sec, 1700000123u);
    CHECK_EQ(packets[0].ts_usec, 456u);
    CHECK(packets[0].raw == std::vector<uint8_t>{0x0a, 0x0b, 0x0c});
    std::filesystem::remove_all(dir);
}

TEST_CASE("pcap reader reports truncated records") {
    const auto dir = temp_dir("pcap_trunc");
    const auto path = dir / "t.pcap";
    Packet pkt;
    pkt.ts_sec = 1;
    pkt.raw.assign(32, 0xAA);
    write_capture_frames({pkt, pkt}, path);

    // Chop the last record's body short.
    const auto full = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, full - 8);
    CHECK_THROWS_AS((void)read_capture(path), format_error);

    // A bad magic is rejected outright.
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write("nonsense", 8);
    }
    CHECK_THROWS_AS((void)read_capture(path), format_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("anonymization erases addresses and nothing else") {
    const MacAddress src{0x02, 0x11, 0x22, 0x33, 0x44, 0x55};
    const MacAddress dst{0x02, 0x66, 0x77, 0x88, 0x99, 0xAA};
    Packet pkt = make_ipv4_frame(src, dst, 1, 0, {0xDE, 0xAD, 0xBE, 0xEF});
    const Packet original = pkt;

    const Packet anon = anonymize(pkt);
    REQUIRE(anon.raw.size() == original.raw.size());
    for (size_t i = 0; i < 12; ++i) CHECK_EQ(anon.raw[i], 0);
    CHECK_EQ(anon.raw[12], 0x08);
    CHECK_EQ(anon.raw[13], 0x00);
    for (size_t i = 14 + 12; i < 14 + 20; ++i) CHECK_EQ(anon.raw[i], 0);
    // Every byte outside the address fields is untouched.
    for (size_t i = 12; i < anon.raw.size(); ++i) {
        if (i >= 14 + 12 && i < 14 + 20) continue;
        CHECK_EQ(anon.raw[i], original.raw[i]);
    }

    // Idempotent: a second pass changes nothing.
    CHECK(anonymize(anon).raw == anon.raw);

    // IPv6 addresses occupy bytes 8..40 of the IP header.
    Packet six;
    six.raw.assign(14 + 40, 0xEE);
    six.raw[12] = 0x86;
    six.raw[13] = 0xDD;
    const Packet six_anon = anonymize(six);
    for (size_t i = 14 + 8; i < 14 + 40; ++i) CHECK_EQ(six_anon.raw[i], 0);
    CHECK_EQ(six_anon.raw[14 + 7], 0xEE);

    Packet runt;
    runt.raw.assign(9, 0x01);
    CHECK_THROWS_AS((void)anonymize(runt), format_error);

    Packet alien;
    alien.link_type = 101;  // raw IP, not Ethernet
    alien.raw.assign(40, 0x01);
    CHECK_THROWS_AS((void)anonymize(alien), constraint_error);
}

TEST_CASE("device maps round-trip and reject duplicates") {
    const auto dir = temp_dir("dmap");
    DeviceMap dmap;
    dmap.entries.push_back({"left", mac_from_string("02:00:00:00:00:01")});
    dmap.entries.push_back({"right", mac_from_string("02:00:00:00:00:02")});
    const auto path = dir / "devicemap.csv";
    dmap.save_csv(path);

    const DeviceMap reread = DeviceMap::load_csv(path);
    REQUIRE(reread.entries.size() == 2);
    CHECK_EQ(reread.entries[0].label, "left");
    CHECK_EQ(mac_to_string(reread.entries[1].mac), "02:00:00:00:00:02");

    const MacAddress probe{0x02, 0, 0, 0, 0, 0x02};
    const DeviceMap::Entry* hit = reread.find_mac(probe);
    REQUIRE(hit != nullptr);
    CHECK_EQ(hit->label, "right");
    const MacAddress miss{0x02, 0, 0, 0, 0, 0x03};
    CHECK(reread.find_mac(miss) == nullptr);

    const auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "label,mac\na,02:00:00:00:00:01\na,02:00:00:00:00:02\n";
    }
    CHECK_THROWS_AS((void)DeviceMap::load_csv(bad), format_error);
    {
        std::ofstream out(bad);
        out << "label,mac\na,02:00:00:00:00:01\nb,02:00:00:00:00:01\n";
    }
    CHECK_THROWS_AS((void)DeviceMap::load_csv(bad), format_error);
    {
        std::ofstream out(bad);
        out << "mac,label\n";
    }
    CHECK_THROWS_AS((void)DeviceMap::load_csv(bad), format_error);

    CHECK_THROWS_AS((void)mac_from_string("02:00:00:00:00"), format_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("flow extraction conserves packets and honors source-MAC precedence") {
    const MacAddress cam{0x02, 0, 0, 0, 0, 0x01};
    const MacAddress plug{0x02, 0, 0, 0, 0, 0x02};
    const MacAddress stranger{0x02, 0, 0, 0, 0, 0x99};
    DeviceMap dmap;
    dmap.entries.push_back({"camera", cam});
    dmap.entries.push_back({"plug", plug});

    std::vector<Packet> packets;
    packets.push_back(make_ipv4_frame(cam, stranger, 0, 0, {1}));       // camera by source
    packets.push_back(make_ipv4_frame(stranger, plug, 0, 1, {2}));      // plug by destination
    packets.push_back(make_ipv4_frame(cam, plug, 0, 2, {3}));           // source wins over dest
    packets.push_back(make_ipv4_frame(stranger, stranger, 0, 3, {4}));  // unmatched
    packets.push_back(make_ipv4_frame(plug, cam, 0, 4, {5}));           // plug by source

    const ExtractResult result = extract_flows(packets, dmap);
    CHECK_EQ(result.total_packets, 5);
    CHECK_EQ(result.unmatched_packets, 1);
    size_t grouped = 0;
    for (const Flow& flow : result.flows) grouped += flow.packets.size();
    CHECK_EQ(grouped + result.unmatched_packets, result.total_packets);

    REQUIRE(result.flows.size() == 2);
    CHECK_EQ(result.flows[0].device_label, "camera");
    CHECK_EQ(result.flows[0].packets.size(), 2);
    CHECK_EQ(result.flows[1].device_label, "plug");
    CHECK_EQ(result.flows[1].packets.size(), 2);

    // Extracted packets are anonymized; the payload discriminator survives.
    const Flow& camera_flow = result.flows[0];
    CHECK_EQ(camera_flow.packets[0].raw.back(), 1);
    CHECK_EQ(camera_flow.packets[1].raw.back(), 3);
    for (size_t i = 0; i < 12; ++i) CHECK_EQ(camera_flow.packets[0].raw[i], 0);
}

TEST_CASE("interval windows split a capture at fixed boundaries") {
    const MacAddress cam{0x02, 0, 0, 0, 0, 0x01};
    DeviceMap dmap;
    dmap.entries.push_back({"camera", cam});

    // Packets at t = 0, 5, 10, 24, 25 seconds: 10-second windows give
    // groups {0,5}, {10}, {24,25 -> windows 2 and 2}.
    std::vector<Packet> packets;
    for (const uint32_t t : {0u, 5u, 10u, 24u, 25u}) {
        packets.push_back(make_ipv4_frame(cam, cam, 1000 + t, 0, {static_cast<uint8_t>(t)}));
    }

    const ExtractResult whole = extract_flows(packets, dmap);
    REQUIRE(whole.flows.size() == 1);
    CHECK_EQ(whole.flows[0].packets.size(), 5);

    const ExtractResult split = extract_flows(packets, dmap, 10.0);
    REQUIRE(split.flows.size() == 3);
    CHECK_EQ(split.flows[0].packets.size(), 2);  // t in [0,10)
    CHECK_EQ(split.flows[1].packets.size(), 1);  // t in [10,20)
    CHECK_EQ(split.flows[2].packets.size(), 2);  // t in [20,30)
    CHECK_EQ(split.flows[0].interval_start, doctest::Approx(1000.0));
    CHECK_EQ(split.flows[1].interval_start, doctest::Approx(1010.0));
    CHECK_EQ(split.flows[2].interval_end, doctest::Approx(1030.0));

    CHECK_THROWS_AS((void)extract_flows(packets, dmap, 0.0), constraint_error);
    CHECK_THROWS_AS((void)extract_flows(packets, DeviceMap{}), constraint_error);
}

TEST_CASE("synthetic profiles mutate a stable template") {
    const auto profiles = generate_profiles(4, 99, 0.05, {64, 160});
    REQUIRE(profiles.size() == 4);
    CHECK_EQ(profiles[0].label, "device-00");
    CHECK_EQ(profiles[3].label, "device-03");
    std::set<std::string> macs;
    for (const auto& p : profiles) macs.insert(mac_to_string(p.mac));
    CHECK_EQ(macs.size(), 4);

    // Same seed, same profiles.
    const auto again = generate_profiles(4, 99, 0.05, {64, 160});
    CHECK(again[2].template_bytes == profiles[2].template_bytes);

    // Template agreement matrix: every off-diagonal pair below 50%.
    for (size_t i = 0; i < profiles.size(); ++i) {
        for (size_t j = i + 1; j < profiles.size(); ++j) {
            const auto& a = profiles[i].template_bytes;
            const auto& b = profiles[j].template_bytes;
            const size_t len = std::min(a.size(), b.size());
            size_t agree = 0;
            for (size_t p = 0; p < len; ++p) agree += a[p] == b[p];
            CHECK(static_cast<double>(agree) / static_cast<double>(len) < 0.5);
        }
    }

    // A zero mutation rate reproduces the template byte-for-byte.
    auto frozen = generate_profiles(1, 5, 0.0, {96, 96});
    const Flow pure = generate_flow(frozen[0], 3, 1);
    for (const Packet& pkt : pure.packets) {
        REQUIRE(pkt.raw.size() == 42 + 96);
        CHECK(std::equal(pkt.raw.begin() + 42, pkt.raw.end(), frozen[0].template_bytes.begin()));
    }

    // Full mutation stays reproducible under the seed.
    auto chaotic = generate_profiles(1, 5, 1.0, {96, 96});
    const Flow c1 = generate_flow(chaotic[0], 3, 9);
    const Flow c2 = generate_flow(chaotic[0], 3, 9);
    for (size_t i = 0; i < c1.packets.size(); ++i) CHECK(c1.packets[i].raw == c2.packets[i].raw);

    // Two flows of one device agree at roughly the mutation-model rate:
    // both bytes intact with probability (1-m)^2, otherwise a 1/256
    // accidental match.
    const DeviceProfile& dev = profiles[1];
    const Flow a = generate_flow(dev, 200, 7);
    const Flow b = generate_flow(dev, 200, 8);
    size_t same = 0;
    size_t compared = 0;
    for (size_t i = 0; i < a.packets.size(); ++i) {
        const auto& pa = a.packets[i].raw;
        const auto& pb = b.packets[i].raw;
        const size_t len = std::min(pa.size(), pb.size());
        for (size_t j = 42; j < len; ++j) {  // payload starts after Eth+IP+UDP
            same += pa[j] == pb[j];
            ++compared;
        }
    }
    const double m = dev.mutation_rate;
    const double expected = (1 - m) * (1 - m) + (1 - (1 - m) * (1 - m)) / 256.0;
    CHECK(compared > 5000);
    CHECK(std::abs(static_cast<double>(same) / static_cast<double>(compared) - expected) < 0.02);

    // Distinct devices share nothing but chance agreement.
    const Flow c = generate_flow(profiles[2], 200, 7);
    size_t cross_same = 0;
    size_t cross_compared = 0;
    for (size_t i = 0; i < a.packets.size(); ++i) {
        const auto& pa = a.packets[i].raw;
        const auto& pc = c.packets[i].raw;
        const size_t len = std::min(pa.size(), pc.size());
        for (size_t j = 42; j < len; ++j) {
            cross_same += pa[j] == pc[j];
            ++cross_compared;
        }
    }
    CHECK(static_cast<double>(cross_same) / static_cast<double>(cross_compared) < 0.5);

    CHECK_THROWS_AS((void)generate_profiles(0, 1), constraint_error);
    CHECK_THROWS_AS((void)generate_profiles(2, 1, 1.5), constraint_error);
    CHECK_THROWS_AS((void)generate_flow(dev, 0, 1), constraint_error);
}

TEST_CASE("synthetic corpus on disk equals the in-memory corpus") {
    const auto dir = temp_dir("synth");
    SynthCorpusOptions options;
    options.devices = 3;
    options.flows_per_device = 4;
    options.packets_per_flow = 5;
    options.seed = 42;
    write_synth_corpus(options, dir);

    // devicemap + 12 captures
    CHECK(std::filesystem::exists(dir / "devicemap.csv"));
    size_t pcaps = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        pcaps += e.path().extension() == ".pcap";
    }
    CHECK_EQ(pcaps, 12);

    const LabeledCorpus from_disk = load_corpus_dir(dir);
    const LabeledCorpus in_memory = generate_corpus(options);
    REQUIRE(from_disk.size() == 12);
    REQUIRE(in_memory.size() == 12);
    for (size_t i = 0; i < from_disk.size(); ++i) {
        CHECK_EQ(from_disk.items[i].label, in_memory.items[i].label);
        CHECK_EQ(from_disk.items[i].source_id, in_memory.items[i].source_id);
        CHECK(from_disk.items[i].bytes == in_memory.items[i].bytes);
    }

    // No device MAC survives anonymization anywhere in the streams.
    const DeviceMap dmap = DeviceMap::load_csv(dir / "devicemap.csv");
    for (const CorpusItem& item : from_disk.items) {
        for (const auto& entry : dmap.entries) {
            const auto& mac = entry.mac;
            const auto hit = std::search(item.bytes.begin(), item.bytes.end(), mac.begin(), mac.end());
            CHECK(hit == item.bytes.end());
        }
    }

    const auto groups = from_disk.by_label();
    REQUIRE(groups.size() == 3);
    for (const auto& [label, indices] : groups) CHECK_EQ(indices.size(), 4);

    std::filesystem::remove_all(dir);
}
