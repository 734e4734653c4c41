#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsifr/classify.hpp"
#include "lsifr/corpus.hpp"
#include "lsifr/digest.hpp"
#include "lsifr/errors.hpp"
#include "lsifr/eval.hpp"
#include "lsifr/flow.hpp"
#include "lsifr/params.hpp"
#include "lsifr/pcap.hpp"
#include "lsifr/sigdb.hpp"
#include "lsifr/synth.hpp"

namespace {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lsifr::data_error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

std::pair<size_t, size_t> parse_range(const std::string& text) {
    const size_t dots = text.find("..");
    if (dots == std::string::npos) {
        throw lsifr::format_error("range must look like <first>..<last>: " + text);
    }
    try {
        const size_t first = std::stoull(text.substr(0, dots));
        const size_t last = std::stoull(text.substr(dots + 2));
        return {first, last};
    } catch (const std::exception&) {
        throw lsifr::format_error("range bounds must be integers: " + text);
    }
}

lsifr::SignatureStore build_store_from_corpus(const lsifr::LabeledCorpus& corpus,
                                              const lsifr::NilsimsaParams& params) {
    lsifr::SignatureStore store(params.canonical_id());
    for (const lsifr::CorpusItem& item : corpus.items) {
        store.add({item.label, item.source_id, lsifr::digest(item.bytes, params)});
    }
    return store;
}

void print_flows(const lsifr::ExtractResult& result) {
    for (const lsifr::Flow& flow : result.flows) {
        size_t bytes = 0;
        for (const lsifr::Packet& pkt : flow.packets) bytes += pkt.raw.size();
        std::printf("%s\t%zu\t%zu\t%.6f\t%.6f\n", flow.device_label.c_str(), flow.packets.size(),
                    bytes, flow.interval_start, flow.interval_end);
    }
    std::fprintf(stderr, "packets: %zu total, %zu unmatched, %zu flows\n", result.total_packets,
                 result.unmatched_packets, result.flows.size());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lsifr: tunable locality-sensitive fingerprinting of traffic flows"};
    app.require_subcommand(1);

    const std::string default_params = lsifr::default_generalized_params().canonical_id();
    const std::string classic_id = lsifr::classic_params().canonical_id();

    // digest ---------------------------------------------------------------
    auto* cmd_digest = app.add_subcommand("digest", "Fingerprint a raw byte-stream file");
    std::string digest_file;
    std::string digest_params = default_params;
    cmd_digest->add_option("file", digest_file, "input byte stream")->required();
    cmd_digest->add_option("--params", digest_params, "parameter point")
        ->capture_default_str();
    cmd_digest->callback([&] {
        const lsifr::NilsimsaParams params = lsifr::parse_params(digest_params);
        const lsifr::Digest d = lsifr::digest(read_file_bytes(digest_file), params);
        std::printf("%s\n", d.to_hex().c_str());
    });

    // ingest ---------------------------------------------------------------
    auto* cmd_ingest = app.add_subcommand("ingest", "Extract device flows from a capture");
    std::string ingest_pcap;
    std::string ingest_map;
    std::optional<double> ingest_interval;
    cmd_ingest->add_option("pcap", ingest_pcap, "classic pcap file")->required();
    cmd_ingest->add_option("--map", ingest_map, "device map CSV (label,mac)")->required();
    cmd_ingest->add_option("--interval", ingest_interval,
                           "window length in seconds (default: whole file)");
    cmd_ingest->callback([&] {
        const auto packets = lsifr::read_capture(ingest_pcap);
        const auto dmap = lsifr::DeviceMap::load_csv(ingest_map);
        print_flows(lsifr::extract_flows(packets, dmap, ingest_interval,
                                         std::filesystem::path(ingest_pcap).stem().string()));
    });

    // db -------------------------------------------------------------------
    auto* cmd_db = app.add_subcommand("db", "Manage signature databases");
    cmd_db->require_subcommand(1);

    auto* db_build = cmd_db->add_subcommand("build", "Digest a corpus into a fresh database");
    std::string build_corpus, build_out;
    std::string build_params = default_params;
    db_build->add_option("--corpus", build_corpus, "corpus directory")->required();
    db_build->add_option("--params", build_params, "parameter point")->capture_default_str();
    db_build->add_option("--out", build_out, "database file to write")->required();
    db_build->callback([&] {
        const auto corpus = lsifr::load_corpus_dir(build_corpus);
        const auto store =
            build_store_from_corpus(corpus, lsifr::parse_params(build_params));
        store.save(build_out);
        std::fprintf(stderr, "wrote %zu signatures of %zu devices to %s\n", store.size(),
                     store.labels().size(), build_out.c_str());
    });

    auto* db_add = cmd_db->add_subcommand("add", "Append a corpus to an existing database");
    std::string add_db, add_corpus, add_out;
    db_add->add_option("--db", add_db, "existing database file")->required();
    db_add->add_option("--corpus", add_corpus, "corpus directory to append")->required();
    db_add->add_option("--out", add_out, "output file (default: rewrite --db)");
    db_add->callback([&] {
        lsifr::SignatureStore store = lsifr::SignatureStore::load(add_db);
        const lsifr::NilsimsaParams params = lsifr::parse_params(store.params_id());
        const auto corpus = lsifr::load_corpus_dir(add_corpus);
        for (const lsifr::CorpusItem& item : corpus.items) {
            store.add({item.label, item.source_id, lsifr::digest(item.bytes, params)});
        }
        store.save(add_out.empty() ? add_db : add_out);
        std::fprintf(stderr, "appended %zu signatures; database now holds %zu\n",
                     corpus.items.size(), store.size());
    });

    auto* db_list = cmd_db->add_subcommand("list", "Print label and signature counts");
    std::string list_db;
    db_list->add_option("--db", list_db, "database file")->required();
    db_list->callback([&] {
        const lsifr::SignatureStore store = lsifr::SignatureStore::load(list_db);
        std::printf("# params %s\n", store.params_id().c_str());
        for (const std::string& label : store.labels()) {
            std::printf("%s\t%zu\n", label.c_str(), store.query_by_label(label).size());
        }
    });

    auto* db_remove = cmd_db->add_subcommand("remove", "Delete every record of one label");
    std::string remove_db, remove_label, remove_out;
    db_remove->add_option("--db", remove_db, "database file")->required();
    db_remove->add_option("--label", remove_label, "device label to delete")->required();
    db_remove->add_option("--out", remove_out, "output file (default: rewrite --db)");
    db_remove->callback([&] {
        lsifr::SignatureStore store = lsifr::SignatureStore::load(remove_db);
        const size_t before = store.size();
        store.remove_label(remove_label);
        store.save(remove_out.empty() ? remove_db : remove_out);
        std::fprintf(stderr, "removed %zu records of '%s'\n", before - store.size(),
                     remove_label.c_str());
    });

    // identify ---------------------------------------------------------------
    auto* cmd_identify = app.add_subcommand("identify", "Match input against a database");
    std::string id_input, id_db, id_map;
    std::string id_policy = "none";
    std::string id_params;
    std::optional<double> id_interval;
    cmd_identify->add_option("input", id_input, "pcap (with --map) or raw stream file")
        ->required();
    cmd_identify->add_option("--db", id_db, "signature database")->required();
    cmd_identify->add_option("--policy", id_policy, "none | global:<v> | per-device:<k>")
        ->capture_default_str();
    cmd_identify->add_option("--map", id_map, "device map CSV; treat input as a capture");
    cmd_identify->add_option("--interval", id_interval, "capture window seconds");
    cmd_identify->add_option("--params", id_params,
                             "digest parameters (default: the database's)");
    cmd_identify->callback([&] {
        const lsifr::SignatureStore store = lsifr::SignatureStore::load(id_db);
        const lsifr::NilsimsaParams params =
            lsifr::parse_params(id_params.empty() ? store.params_id() : id_params);
        const lsifr::ThresholdPolicy policy = lsifr::ThresholdPolicy::parse(id_policy);

        std::vector<std::vector<uint8_t>> streams;
        if (!id_map.empty()) {
            const auto packets = lsifr::read_capture(id_input);
            const auto dmap = lsifr::DeviceMap::load_csv(id_map);
            const auto result = lsifr::extract_flows(packets, dmap, id_interval);
            for (const lsifr::Flow& flow : result.flows) {
                streams.push_back(lsifr::flow_bytes(flow));
            }
            if (streams.empty()) throw lsifr::data_error("no mapped flows in " + id_input);
        } else {
            streams.push_back(read_file_bytes(id_input));
        }
        for (const auto& stream : streams) {
            const lsifr::Identification id =
                lsifr::identify(lsifr::digest(stream, params), store, policy);
            std::printf("%s\n", id.to_json().c_str());
        }
    });

    // evaluate ---------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("evaluate", "Cross-validated identification metrics");
    std::string eval_corpus, eval_out;
    std::string eval_params = default_params;
    std::string eval_policy = "none";
    lsifr::EvalOptions eval_options;
    cmd_eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
    cmd_eval->add_option("--params", eval_params, "parameter point")->capture_default_str();
    cmd_eval->add_option("--k", eval_options.folds, "folds")->capture_default_str();
    cmd_eval->add_option("--repeats", eval_options.repeats, "repeat count")
        ->capture_default_str();
    cmd_eval->add_option("--seed", eval_options.seed, "base seed")->capture_default_str();
    cmd_eval->add_option("--policy", eval_policy, "threshold policy")->capture_default_str();
    cmd_eval->add_option("--out", eval_out, "also write the JSON report here");
    cmd_eval->callback([&] {
        eval_options.params = lsifr::parse_params(eval_params);
        eval_options.policy = lsifr::ThresholdPolicy::parse(eval_policy);
        const lsifr::EvalReport report =
            lsifr::evaluate(lsifr::load_corpus_dir(eval_corpus), eval_options);
        const std::string json = report.to_json();
        if (!eval_out.empty()) {
            std::ofstream out(eval_out, std::ios::trunc);
            if (!out) throw lsifr::data_error("cannot write " + eval_out);
            out << json << '\n';
        }
        std::printf("%s\n", json.c_str());
    });

    // sweep ------------------------------------------------------------------
    auto* cmd_sweep = app.add_subcommand("sweep", "Evaluate a slice of the parameter grid");
    std::string sweep_corpus, sweep_out, sweep_range;
    std::vector<std::string> sweep_hashes;
    std::string sweep_policy = "none";
    lsifr::SweepOptions sweep_options;
    cmd_sweep->add_option("--corpus", sweep_corpus, "corpus directory")->required();
    cmd_sweep->add_option("--hash", sweep_hashes, "restrict to hash kinds (repeatable)");
    cmd_sweep->add_option("--range", sweep_range, "inclusive grid slice <first>..<last>");
    cmd_sweep->add_option("--jobs", sweep_options.jobs, "worker threads")->capture_default_str();
    cmd_sweep->add_option("--k", sweep_options.folds, "folds")->capture_default_str();
    cmd_sweep->add_option("--repeats", sweep_options.repeats, "repeat count")
        ->capture_default_str();
    cmd_sweep->add_option("--seed", sweep_options.seed, "base seed")->capture_default_str();
    cmd_sweep->add_option("--policy", sweep_policy, "threshold policy")->capture_default_str();
    cmd_sweep->add_option("--out", sweep_out, "CSV file (default: standard output)");
    cmd_sweep->callback([&] {
        sweep_options.policy = lsifr::ThresholdPolicy::parse(sweep_policy);
        for (const std::string& name : sweep_hashes) {
            sweep_options.hashes.push_back(lsifr::hash_kind_from_string(name));
        }
        if (!sweep_range.empty()) sweep_options.range = parse_range(sweep_range);
        const auto rows =
            lsifr::run_sweep(lsifr::load_corpus_dir(sweep_corpus), sweep_options);
        if (sweep_out.empty()) {
            lsifr::write_sweep_csv(rows, std::cout);
        } else {
            lsifr::write_sweep_csv(rows, std::filesystem::path(sweep_out));
            std::fprintf(stderr, "wrote %zu rows to %s\n", rows.size(), sweep_out.c_str());
        }
    });

    // correlate ----------------------------------------------------------------
    auto* cmd_corr = app.add_subcommand("correlate", "Pearson r between a parameter and accuracy");
    std::string corr_csv;
    std::string corr_param = "accumulator";
    cmd_corr->add_option("csv", corr_csv, "sweep CSV file")->required();
    cmd_corr->add_option("--param", corr_param, "window | ngram | accumulator")
        ->capture_default_str();
    cmd_corr->callback([&] {
        const auto rows = lsifr::read_sweep_csv(corr_csv);
        std::printf("%.6f\n", lsifr::param_correlation(rows, corr_param));
    });

    // synth ----------------------------------------------------------------------
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
    std::string synth_out;
    lsifr::SynthCorpusOptions synth_options;
    int len_min = synth_options.packet_len_range.first;
    int len_max = synth_options.packet_len_range.second;
    cmd_synth->add_option("--out", synth_out, "corpus directory to create")->required();
    cmd_synth->add_option("--devices", synth_options.devices, "device count")
        ->capture_default_str();
    cmd_synth->add_option("--flows", synth_options.flows_per_device, "flows per device")
        ->capture_default_str();
    cmd_synth->add_option("--packets", synth_options.packets_per_flow, "packets per flow")
        ->capture_default_str();
    cmd_synth->add_option("--mutation", synth_options.mutation_rate, "byte mutation rate")
        ->capture_default_str();
    cmd_synth->add_option("--seed", synth_options.seed, "generator seed")->capture_default_str();
    cmd_synth->add_option("--len-min", len_min, "min payload bytes")->capture_default_str();
    cmd_synth->add_option("--len-max", len_max, "max payload bytes")->capture_default_str();
    cmd_synth->callback([&] {
        synth_options.packet_len_range = {static_cast<uint16_t>(len_min),
                                          static_cast<uint16_t>(len_max)};
        lsifr::write_synth_corpus(synth_options, synth_out);
        std::fprintf(stderr, "wrote %d devices x %d flows to %s\n", synth_options.devices,
                     synth_options.flows_per_device, synth_out.c_str());
    });

    // bench ------------------------------------------------------------------------
    auto* cmd_bench = app.add_subcommand("bench", "Measure digest throughput");
    std::string bench_params = classic_id;
    uint64_t bench_bytes = 4'000'000;
    uint64_t bench_seed = 1;
    cmd_bench->add_option("--params", bench_params, "parameter point")->capture_default_str();
    cmd_bench->add_option("--bytes", bench_bytes, "stream volume")->capture_default_str();
    cmd_bench->add_option("--seed", bench_seed, "input generator seed")->capture_default_str();
    cmd_bench->callback([&] {
        const lsifr::BenchResult bench =
            lsifr::bench_throughput(lsifr::parse_params(bench_params), bench_bytes, bench_seed);
        nlohmann::json j;
        j["bytes"] = bench.bytes;
        j["seconds"] = bench.seconds;
        j["bytes_per_second"] = bench.bytes_per_second;
        std::printf("%s\n", j.dump().c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << "run with --help for usage\n";
        return 2;
    } catch (const lsifr::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
