#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lsifr/classify.hpp"
#include "lsifr/corpus.hpp"
#include "lsifr/params.hpp"

namespace lsifr {

/// Stratified k-fold assignment. Returns one fold index in [0,k) per
/// corpus item; every label's items are spread across folds as evenly as
/// the counts allow. Deterministic for a fixed (corpus, k, seed).
std::vector<int> kfold_split(const LabeledCorpus& corpus, int k, uint64_t seed);

/// Pooled actual-by-predicted counts.
struct ConfusionMatrix {
    std::map<std::string, std::map<std::string, uint64_t>> cells;
    uint64_t total = 0;

    void add(const std::string& actual, const std::string& predicted);
    uint64_t at(const std::string& actual, const std::string& predicted) const;
};

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    uint64_t support = 0;
};

struct EvalMetrics {
    double accuracy = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;
    std::vector<ClassMetrics> per_class;
};

/// One-vs-rest precision/recall/F1 per actual label plus unweighted macro
/// averages. UNKNOWN predictions count against recall (misses) and are
/// never scored as a class of their own. Divisions by zero yield 0.
EvalMetrics metrics_from_confusion(const ConfusionMatrix& cm);

struct EvalOptions {
    NilsimsaParams params;
    int folds = 4;
    int repeats = 5;
    uint64_t seed = 1;
    ThresholdPolicy policy;
};

struct RepeatSummary {
    uint64_t seed = 0;
    double accuracy = 0.0;
    double f1_macro = 0.0;
};

struct EvalReport {
    std::string params_id;
    int folds = 0;
    int repeats = 0;
    uint64_t seed = 0;
    ConfusionMatrix confusion;  // pooled over repeats x folds
    EvalMetrics metrics;        // from the pooled confusion
    std::vector<RepeatSummary> per_repeat;

    std::string to_json(int indent = 2) const;
};

/// Cross-validated identification accuracy of one parameter point.
/// Digests are computed once per item; each repeat r re-splits the corpus
/// with seed+r, trains a signature store on k-1 folds and scores the
/// held-out fold.
EvalReport evaluate(const LabeledCorpus& corpus, const EvalOptions& options);

// --- parameter sweep ----------------------------------------------------

struct GridPoint {
    size_t index = 0;
    NilsimsaParams params;
};

/// Full generalized-mode grid in canonical order: hash kinds in
/// declaration order, window ascending, n-gram ascending (n < w),
/// accumulator 16..1024 step 16, threshold statistics in declaration
/// order. 6720 points per hash, 100800 total.
std::vector<GridPoint> enumerate_grid();

/// Grid restricted to the given hash kinds; indices keep their positions
/// from the full grid.
std::vector<GridPoint> enumerate_grid(const std::vector<HashKind>& hashes);

struct SweepRow {
    size_t grid_index = 0;
    NilsimsaParams params;
    EvalMetrics metrics;
    double runtime_ms = 0.0;
    std::string status = "ok";  // "ok" or "error: <reason>"
};

struct SweepOptions {
    int folds = 4;
    int repeats = 1;
    uint64_t seed = 1;
    ThresholdPolicy policy;
    int jobs = 1;
    /// Inclusive [first,last] slice of full-grid indices; empty = all.
    std::optional<std::pair<size_t, size_t>> range;
    /// Hash kinds to keep; empty = all.
    std::vector<HashKind> hashes;
};

/// Evaluates every selected grid point against the corpus. A failing
/// point is reported in its row's status instead of aborting the sweep.
/// Rows come back in grid order regardless of the job count.
std::vector<SweepRow> run_sweep(const LabeledCorpus& corpus, const SweepOptions& options);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

/// Pearson correlation coefficient. Throws data_error when either side is
/// shorter than two points or has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Correlation between a numeric parameter column ("window", "ngram" or
/// "accumulator") and accuracy over the "ok" rows of a sweep.
double param_correlation(const std::vector<SweepRow>& rows, const std::string& column);

struct BenchResult {
    uint64_t bytes = 0;
    double seconds = 0.0;
    double bytes_per_second = 0.0;
};

/// Digests `total_bytes` of seeded pseudorandom input in one stream and
/// reports wall-clock throughput.
BenchResult bench_throughput(const NilsimsaParams& params, uint64_t total_bytes, uint64_t seed);

} // namespace lsifr
