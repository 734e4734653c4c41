#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lsifr/digest.hpp"
#include "lsifr/errors.hpp"
#include "lsifr/sigdb.hpp"
#include "lsifr/synth.hpp"

using namespace lsifr;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     (std::string("lsifr_sigdb_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Digest digest_of(const std::string& text, const NilsimsaParams& params) {
    return digest(std::vector<uint8_t>(text.begin(), text.end()), params);
}

} // namespace

TEST_CASE("store identity is normalized and enforced on add") {
    // Keys out of order, defaults omitted: same canonical identity.
    SignatureStore store("a=256,w=5");
    CHECK_EQ(store.params_id(), "w=5,n=3,h=TRAN53,a=256,t=median,m=generalized");

    const NilsimsaParams params = default_generalized_params();
    store.add({"lamp", "m1", digest_of("stream one", params)});
    CHECK_EQ(store.size(), 1);

    NilsimsaParams other = params;
    other.accumulator_size = 512;
    CHECK_THROWS_AS(store.add({"lamp", "m2", digest_of("stream two", other)}),
                    incompatibility_error);
    CHECK_THROWS_AS(store.add({"", "m3", digest_of("stream three", params)}), constraint_error);
    CHECK_EQ(store.size(), 1);

    CHECK_THROWS_AS(SignatureStore("w=99"), constraint_error);
    CHECK_THROWS_AS(SignatureStore("gibberish"), format_error);
}

TEST_CASE("queries preserve insertion order and labels sort uniquely") {
    const NilsimsaParams params = default_generalized_params();
    SignatureStore store(params.canonical_id());
    store.add({"zebra", "m0", digest_of("z0", params)});
    store.add({"apple", "m0", digest_of("a0", params)});
    store.add({"zebra", "m1", digest_of("z1", params)});
    store.add({"apple", "m1", digest_of("a1", params)});

    const std::vector<std::string> labels = store.labels();
    CHECK(labels == std::vector<std::string>{"apple", "zebra"});

    const std::vector<Digest> zebra = store.query_by_label("zebra");
    REQUIRE(zebra.size() == 2);
    CHECK_EQ(zebra[0].to_hex(), digest_of("z0", params).to_hex());
    CHECK_EQ(zebra[1].to_hex(), digest_of("z1", params).to_hex());
    CHECK(store.query_by_label("nobody").empty());

    store.remove_label("zebra");
    CHECK_EQ(store.size(), 2);
    CHECK(store.query_by_label("zebra").empty());
    CHECK_EQ(store.query_by_label("apple").size(), 2);
    // Removing an absent label is a no-op.
    store.remove_label("zebra");
    CHECK_EQ(store.size(), 2);
}

TEST_CASE("a full corpus of signatures survives a save/load round-trip") {
    const auto dir = temp_dir("roundtrip");
    SynthCorpusOptions options;
    options.devices = 23;
    options.flows_per_device = 20;
    options.packets_per_flow = 4;
    options.seed = 3;
    const LabeledCorpus corpus = generate_corpus(options);
    REQUIRE(corpus.size() == 460);

    const NilsimsaParams params = default_generalized_params();
    SignatureStore store(params.canonical_id());
    for (const CorpusItem& item : corpus.items) {
        store.add({item.label, item.source_id, digest(item.bytes, params)});
    }
    REQUIRE(store.size() == 460);
    CHECK_EQ(store.labels().size(), 23);

    const auto path = dir / "signatures.tsv";
    store.save(path);
    const SignatureStore reread = SignatureStore::load(path);

    CHECK_EQ(reread.params_id(), store.params_id());
    REQUIRE(reread.size() == store.size());
    for (size_t i = 0; i < store.size(); ++i) {
        CHECK_EQ(reread.records()[i].label, store.records()[i].label);
        CHECK_EQ(reread.records()[i].source_id, store.records()[i].source_id);
        CHECK(reread.records()[i].digest == store.records()[i].digest);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("an empty store round-trips") {
    const auto dir = temp_dir("empty");
    const auto path = dir / "empty.tsv";
    SignatureStore store("w=6,n=5,h=MMH3,a=64,t=IQR");
    store.save(path);
    const SignatureStore reread = SignatureStore::load(path);
    CHECK(reread.empty());
    CHECK_EQ(reread.params_id(), "w=6,n=5,h=MMH3,a=64,t=IQR,m=generalized");
    std::filesystem::remove_all(dir);
}

TEST_CASE("corrupted stores are rejected with the offending line") {
    const auto dir = temp_dir("corrupt");
    const auto path = dir / "db.tsv";
    const std::string header = "LSIFR-SIGDB v1 w=5,n=3,h=TRAN53,a=256,t=median,m=generalized\n";
    const std::string good = "lamp\tm1\t" + std::string(64, '0') + "\n";

    const auto write_file = [&](const std::string& content) {
        std::ofstream out(path, std::ios::trunc);
        out << content;
    };

    write_file("NOT-A-STORE v1 w=5\n");
    CHECK_THROWS_AS((void)SignatureStore::load(path), format_error);

    write_file("LSIFR-SIGDB v9 w=5,n=3,h=TRAN53,a=256,t=median,m=generalized\n");
    CHECK_THROWS_AS((void)SignatureStore::load(path), format_error);

    write_file(header + good + "lamp m2 missing-tabs\n");
    CHECK_THROWS_WITH_AS((void)SignatureStore::load(path),
                         doctest::Contains("line 3"), format_error);

    // Digest shorter than the parameter point's bit length.
    write_file(header + "lamp\tm1\tabcd\n");
    CHECK_THROWS_WITH_AS((void)SignatureStore::load(path),
                         doctest::Contains("line 2"), format_error);

    // Non-hex digest characters.
    write_file(header + "lamp\tm1\t" + std::string(63, '0') + "x\n");
    CHECK_THROWS_AS((void)SignatureStore::load(path), format_error);

    // Empty label.
    write_file(header + "\tm1\t" + std::string(64, '0') + "\n");
    CHECK_THROWS_AS((void)SignatureStore::load(path), format_error);

    write_file("");
    CHECK_THROWS_AS((void)SignatureStore::load(path), format_error);

    CHECK_THROWS_AS((void)SignatureStore::load(dir / "no-such-file.tsv"), format_error);
    std::filesystem::remove_all(dir);
}
