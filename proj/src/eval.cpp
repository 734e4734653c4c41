#include "lsifr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lsifr/digest.hpp"
#include "lsifr/errors.hpp"

namespace lsifr {

namespace {

constexpr const char* kSweepHeader =
    "grid_index,hash,window,ngram,accumulator,threshold,"
    "precision_macro,recall_macro,f1_macro,accuracy,runtime_ms,status";

std::string fmt_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

std::vector<int> kfold_split(const LabeledCorpus& corpus, int k, uint64_t seed) {
    if (corpus.items.empty()) throw data_error("kfold_split: empty corpus");
    if (k < 2) throw constraint_error("kfold_split: need at least 2 folds");

    std::map<std::string, std::vector<size_t>> by_label;
    for (size_t i = 0; i < corpus.items.size(); ++i) {
        by_label[corpus.items[i].label].push_back(i);
    }

    for (const auto& [label, indices] : by_label) {
        if (indices.size() < static_cast<size_t>(k)) {
            throw data_error("kfold_split: label '" + label + "' has " +
                             std::to_string(indices.size()) + " items, need at least " +
                             std::to_string(k) + " for stratification");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<int> assignment(corpus.items.size(), 0);
    for (auto& [label, indices] : by_label) {
        for (size_t i = indices.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(rng() % i);
            std::swap(indices[i - 1], indices[j]);
        }
        for (size_t j = 0; j < indices.size(); ++j) {
            assignment[indices[j]] = static_cast<int>(j % static_cast<size_t>(k));
        }
    }
    return assignment;
}

void ConfusionMatrix::add(const std::string& actual, const std::string& predicted) {
    cells[actual][predicted] += 1;
    total += 1;
}

uint64_t ConfusionMatrix::at(const std::string& actual, const std::string& predicted) const {
    const auto row = cells.find(actual);
    if (row == cells.end()) return 0;
    const auto cell = row->second.find(predicted);
    return cell == row->second.end() ? 0 : cell->second;
}

EvalMetrics metrics_from_confusion(const ConfusionMatrix& cm) {
    EvalMetrics m;
    if (cm.total == 0) return m;

    uint64_t diagonal = 0;
    for (const auto& [actual, row] : cm.cells) {
        if (actual == kUnknownLabel) continue;

        uint64_t tp = 0;
        uint64_t fn = 0;
        for (const auto& [predicted, count] : row) {
            if (predicted == actual) {
                tp += count;
            } else {
                fn += count;
            }
        }
        uint64_t fp = 0;
        for (const auto& [other, other_row] : cm.cells) {
            if (other == actual) continue;
            const auto cell = other_row.find(actual);
            if (cell != other_row.end()) fp += cell->second;
        }

        ClassMetrics cls;
        cls.label = actual;
        cls.support = tp + fn;
        cls.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        cls.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        cls.f1 = (cls.precision + cls.recall) == 0.0
                     ? 0.0
                     : 2.0 * cls.precision * cls.recall / (cls.precision + cls.recall);
        m.per_class.push_back(std::move(cls));
        diagonal += tp;
    }

    if (!m.per_class.empty()) {
        for (const ClassMetrics& cls : m.per_class) {
            m.precision_macro += cls.precision;
            m.recall_macro += cls.recall;
            m.f1_macro += cls.f1;
        }
        m.precision_macro /= static_cast<double>(m.per_class.size());
        m.recall_macro /= static_cast<double>(m.per_class.size());
        m.f1_macro /= static_cast<double>(m.per_class.size());
    }
    m.accuracy = static_cast<double>(diagonal) / static_cast<double>(cm.total);
    return m;
}

EvalReport evaluate(const LabeledCorpus& corpus, const EvalOptions& options) {
    if (corpus.items.empty()) throw data_error("evaluate: empty corpus");
    if (options.repeats < 1) throw constraint_error("evaluate: repeats must be >= 1");
    validate_params_or_throw(options.params);

    const std::string params_id = options.params.canonical_id();
    std::vector<Digest> digests;
    digests.reserve(corpus.items.size());
    for (const CorpusItem& item : corpus.items) {
        digests.push_back(digest(item.bytes, options.params));
    }

    EvalReport report;
    report.params_id = params_id;
    report.folds = options.folds;
    report.repeats = options.repeats;
    report.seed = options.seed;

    for (int r = 0; r < options.repeats; ++r) {
        const uint64_t repeat_seed = options.seed + static_cast<uint64_t>(r);
        const std::vector<int> folds = kfold_split(corpus, options.folds, repeat_seed);

        ConfusionMatrix repeat_cm;
        for (int f = 0; f < options.folds; ++f) {
            SignatureStore store(params_id);
            for (size_t i = 0; i < corpus.items.size(); ++i) {
                if (folds[i] == f) continue;
                store.add({corpus.items[i].label, corpus.items[i].source_id, digests[i]});
            }
            for (size_t i = 0; i < corpus.items.size(); ++i) {
                if (folds[i] != f) continue;
                const Identification id = identify(digests[i], store, options.policy);
                report.confusion.add(corpus.items[i].label, id.predicted);
                repeat_cm.add(corpus.items[i].label, id.predicted);
            }
        }

        const EvalMetrics repeat_metrics = metrics_from_confusion(repeat_cm);
        report.per_repeat.push_back({repeat_seed, repeat_metrics.accuracy, repeat_metrics.f1_macro});
    }

    report.metrics = metrics_from_confusion(report.confusion);
    return report;
}

std::string EvalReport::to_json(int indent) const {
    nlohmann::json per_class = nlohmann::json::array();
    for (const ClassMetrics& cls : metrics.per_class) {
        per_class.push_back({{"label", cls.label},
                             {"precision", cls.precision},
                             {"recall", cls.recall},
                             {"f1", cls.f1},
                             {"support", cls.support}});
    }
    nlohmann::json repeats_json = nlohmann::json::array();
    for (const RepeatSummary& rep : per_repeat) {
        repeats_json.push_back(
            {{"seed", rep.seed}, {"accuracy", rep.accuracy}, {"f1_macro", rep.f1_macro}});
    }
    nlohmann::json confusion_json = nlohmann::json::object();
    for (const auto& [actual, row] : confusion.cells) {
        nlohmann::json row_json = nlohmann::json::object();
        for (const auto& [predicted, count] : row) row_json[predicted] = count;
        confusion_json[actual] = std::move(row_json);
    }
    const nlohmann::json doc = {{"params", params_id},
                                {"folds", folds},
                                {"repeats", repeats},
                                {"seed", seed},
                                {"metrics",
                                 {{"accuracy", metrics.accuracy},
                                  {"precision_macro", metrics.precision_macro},
                                  {"recall_macro", metrics.recall_macro},
                                  {"f1_macro", metrics.f1_macro},
                                  {"per_class", per_class}}},
                                {"confusion", confusion_json},
                                {"per_repeat", repeats_json}};
    return doc.dump(indent);
}

std::vector<GridPoint> enumerate_grid() {
    static const int kWindows[] = {5, 6, 7, 8, 9, 10};
    static const int kNgrams[] = {3, 5, 7, 9};
    std::vector<GridPoint> grid;
    grid.reserve(100800);
    size_t index = 0;
    for (int h = 0; h < kHashKindCount; ++h) {
        for (int w : kWindows) {
            for (int n : kNgrams) {
                if (n >= w) continue;
                for (int a = 16; a <= 1024; a += 16) {
                    for (int t = 0; t < kThresholdKindCount; ++t) {
                        GridPoint point;
                        point.index = index++;
                        point.params.window_size = w;
                        point.params.ngram_size = n;
                        point.params.hash_kind = static_cast<HashKind>(h);
                        point.params.accumulator_size = a;
                        point.params.threshold_kind = static_cast<ThresholdKind>(t);
                        point.params.mode = Mode::Generalized;
                        grid.push_back(point);
                    }
                }
            }
        }
    }
    return grid;
}

std::vector<GridPoint> enumerate_grid(const std::vector<HashKind>& hashes) {
    if (hashes.empty()) return enumerate_grid();
    std::vector<GridPoint> filtered;
    for (const GridPoint& point : enumerate_grid()) {
        if (std::find(hashes.begin(), hashes.end(), point.params.hash_kind) != hashes.end()) {
            filtered.push_back(point);
        }
    }
    return filtered;
}

std::vector<SweepRow> run_sweep(const LabeledCorpus& corpus, const SweepOptions& options) {
    if (options.jobs < 1) throw constraint_error("run_sweep: jobs must be >= 1");

    std::vector<GridPoint> selected = enumerate_grid(options.hashes);
    if (options.range) {
        const auto [first, last] = *options.range;
        if (first > last) throw constraint_error("run_sweep: empty grid range");
        std::erase_if(selected,
                      [&](const GridPoint& p) { return p.index < first || p.index > last; });
    }

    std::vector<SweepRow> rows(selected.size());
    std::atomic<size_t> next{0};
    const auto worker = [&]() {
        while (true) {
            const size_t slot = next.fetch_add(1);
            if (slot >= selected.size()) break;
            SweepRow& row = rows[slot];
            row.grid_index = selected[slot].index;
            row.params = selected[slot].params;
            const auto start = std::chrono::steady_clock::now();
            try {
                EvalOptions eval_options;
                eval_options.params = row.params;
                eval_options.folds = options.folds;
                eval_options.repeats = options.repeats;
                eval_options.seed = options.seed;
                eval_options.policy = options.policy;
                row.metrics = evaluate(corpus, eval_options).metrics;
                row.status = "ok";
            } catch (const std::exception& e) {
                row.metrics = {};
                row.status = std::string("error: ") + e.what();
            }
            const auto stop = std::chrono::steady_clock::now();
            row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        }
    };

    if (options.jobs == 1 || selected.size() <= 1) {
        worker();
    } else {
        const size_t thread_count =
            std::min<size_t>(static_cast<size_t>(options.jobs), selected.size());
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << kSweepHeader << '\n';
    for (const SweepRow& row : rows) {
        std::string status = row.status;
        for (char& c : status) {
            if (c == ',' || c == '\n' || c == '\r') c = ';';
        }
        out << row.grid_index << ',' << to_string(row.params.hash_kind) << ','
            << row.params.window_size << ',' << row.params.ngram_size << ','
            << row.params.accumulator_size << ',' << to_string(row.params.threshold_kind) << ','
            << fmt_double(row.metrics.precision_macro, 6) << ','
            << fmt_double(row.metrics.recall_macro, 6) << ','
            << fmt_double(row.metrics.f1_macro, 6) << ',' << fmt_double(row.metrics.accuracy, 6)
            << ',' << fmt_double(row.runtime_ms, 3) << ',' << status << '\n';
    }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("write_sweep_csv: cannot open " + path.string());
    write_sweep_csv(rows, out);
    if (!out.flush()) throw data_error("write_sweep_csv: write failed for " + path.string());
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("read_sweep_csv: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw format_error("read_sweep_csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepHeader) throw format_error("read_sweep_csv: unexpected header: " + line);

    std::vector<SweepRow> rows;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 12) {
            throw format_error("read_sweep_csv: line " + std::to_string(line_no) + ": expected 12 fields, got " +
                               std::to_string(fields.size()));
        }
        try {
            SweepRow row;
            row.grid_index = static_cast<size_t>(std::stoull(fields[0]));
            row.params.hash_kind = hash_kind_from_string(fields[1]);
            row.params.window_size = std::stoi(fields[2]);
            row.params.ngram_size = std::stoi(fields[3]);
            row.params.accumulator_size = std::stoi(fields[4]);
            row.params.threshold_kind = threshold_kind_from_string(fields[5]);
            row.params.mode = Mode::Generalized;
            row.metrics.precision_macro = std::stod(fields[6]);
            row.metrics.recall_macro = std::stod(fields[7]);
            row.metrics.f1_macro = std::stod(fields[8]);
            row.metrics.accuracy = std::stod(fields[9]);
            row.runtime_ms = std::stod(fields[10]);
            row.status = fields[11];
            rows.push_back(std::move(row));
        } catch (const lsifr::error&) {
            throw;
        } catch (const std::exception&) {
            throw format_error("read_sweep_csv: line " + std::to_string(line_no) + ": bad numeric field");
        }
    }
    return rows;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw data_error("pearson: length mismatch");
    if (x.size() < 2) throw data_error("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;
    double cov = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) throw data_error("pearson: zero variance");
    return cov / std::sqrt(var_x * var_y);
}

double param_correlation(const std::vector<SweepRow>& rows, const std::string& column) {
    std::vector<double> x;
    std::vector<double> y;
    for (const SweepRow& row : rows) {
        if (row.status != "ok") continue;
        double value = 0.0;
        if (column == "window") {
            value = row.params.window_size;
        } else if (column == "ngram") {
            value = row.params.ngram_size;
        } else if (column == "accumulator") {
            value = row.params.accumulator_size;
        } else {
            throw constraint_error("param_correlation: unknown column " + column +
                                   " (expected window, ngram or accumulator)");
        }
        x.push_back(value);
        y.push_back(row.metrics.accuracy);
    }
    return pearson(x, y);
}

BenchResult bench_throughput(const NilsimsaParams& params, uint64_t total_bytes, uint64_t seed) {
    if (total_bytes == 0) throw constraint_error("bench_throughput: total_bytes must be > 0");
    validate_params_or_throw(params);

    std::vector<uint8_t> chunk(1 << 16);
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i + 8 <= chunk.size(); i += 8) {
        const uint64_t word = rng();
        std::memcpy(chunk.data() + i, &word, 8);
    }

    Digester digester(params);
    const auto start = std::chrono::steady_clock::now();
    uint64_t remaining = total_bytes;
    while (remaining > 0) {
        const size_t take = static_cast<size_t>(std::min<uint64_t>(remaining, chunk.size()));
        digester.update(chunk.data(), take);
        remaining -= take;
    }
    const Digest result = digester.finish();
    const auto stop = std::chrono::steady_clock::now();
    (void)result;

    BenchResult bench;
    bench.bytes = total_bytes;
    bench.seconds = std::chrono::duration<double>(stop - start).count();
    bench.bytes_per_second =
        static_cast<double>(total_bytes) / std::max(bench.seconds, 1e-9);
    return bench;
}

} // namespace lsifr
