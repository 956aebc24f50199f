#pragma once

#include "hoggcn/adam.hpp"
#include "hoggcn/model.hpp"

namespace hoggcn {

struct TrainSettings {
    int max_epochs = 500;
    int patience = 100;      // epochs without validation improvement
    int eval_every = 1;
    AdamConfig optimizer;
    std::uint64_t seed = 0;
    int parallelism = 1;     // worker threads across splits

    void validate() const;
    bool operator==(const TrainSettings&) const = default;
};

struct EpochPoint {
    int epoch = 0;
    double l_gcn = 0, l_mlp = 0, l_lp = 0;
    double val_acc = 0;
    bool operator==(const EpochPoint&) const = default;
};

struct SplitRecord {
    int split_index = 0;
    std::uint64_t run_seed = 0;  // seed_mix(settings.seed, split.seed)
    int best_epoch = 0;
    int epochs_run = 0;
    double best_val_acc = 0;
    double test_acc = 0;
    std::vector<EpochPoint> curve;
    bool operator==(const SplitRecord&) const = default;
};

struct TrainReport {
    ModelConfig model;
    TrainSettings settings;
    std::vector<SplitRecord> splits;
    double mean_acc = 0;
    double std_acc = 0;  // sample standard deviation; 0 for a single split
    bool operator==(const TrainReport&) const = default;
};

/// Mean and sample standard deviation of the per-split test accuracies.
std::pair<double, double> aggregate_accuracy(const std::vector<SplitRecord>& records);

/// Trains one split: forward / joint loss / backward / Adam per epoch,
/// validation-accuracy early stopping with best-epoch parameter restore.
/// The returned model carries the best-epoch parameters.
/// Throws on a non-finite loss, reporting the epoch and loss components.
std::pair<HogModel, SplitRecord> train_one_split(const Graph& graph, const Split& split,
                                                 const ModelConfig& config,
                                                 const TrainSettings& settings,
                                                 int split_index = 0);

/// Independent runs over all splits, aggregated. Splits execute in
/// parallel when settings.parallelism > 1; results are identical to the
/// serial order. When `models` is non-null the trained per-split models
/// are returned through it (indexed like `splits`).
TrainReport run_protocol(const Graph& graph, const ModelConfig& config,
                         const TrainSettings& settings, const std::vector<Split>& splits,
                         std::vector<HogModel>* models = nullptr);

struct SweepPoint {
    int k = 0;
    double alpha = 0, beta = 0;
    TrainReport report;
};

/// One run_protocol per k in [k_from, k_to].
std::vector<SweepPoint> sweep_k(const Graph& graph, ModelConfig config,
                                const TrainSettings& settings, const std::vector<Split>& splits,
                                int k_from, int k_to);

/// One run_protocol per (alpha, beta) pair of the grid values.
std::vector<SweepPoint> sweep_alpha_beta(const Graph& graph, ModelConfig config,
                                         const TrainSettings& settings,
                                         const std::vector<Split>& splits,
                                         const std::vector<double>& grid_values);

// ---- run directory artifacts ----

/// report.json: config snapshot, per-split records, aggregate statistics.
void write_report_json(const TrainReport& report, const std::filesystem::path& path);
/// curves.tsv: split, epoch, l_gcn, l_mlp, l_lp, val_acc.
void write_curves_tsv(const TrainReport& report, const std::filesystem::path& path);
/// sweep.tsv: one row per grid point.
void write_sweep_tsv(const std::vector<SweepPoint>& points, const std::filesystem::path& path);

}  // namespace hoggcn
