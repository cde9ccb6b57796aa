#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gladformer/config.hpp"
#include "gladformer/metrics.hpp"
#include "gladformer/model.hpp"

namespace gladformer::train {

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_auc;
    double val_f1 = 0.0;
};

struct FoldReport {
    int fold = -1;
    metrics::Metrics test;
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    double seconds = 0.0;
};

struct RunReport {
    TrainConfig config;
    std::string dataset;
    std::string mode;  // "holdout" or "kfold"
    std::vector<FoldReport> folds;
    std::optional<double> mean_auc, std_auc;
    double mean_f1 = 0.0, std_f1 = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    nn::Model model;  // best-validation parameters loaded
    FoldReport report;
};

// Adam-optimized VOCE training with early stopping on validation AUC. Caches
// must cover the whole dataset (indexed by position). Deterministic for fixed
// config and seed; per-graph gradients within a batch are averaged in batch
// order regardless of thread schedule. `warm_start`, when non-null, replaces
// the seeded initialization (e.g. to resume from a checkpoint).
TrainResult train(const TrainConfig& cfg, const data::GraphDataset& ds,
                  const std::vector<nn::GraphCache>& caches, const std::vector<int>& train_idx,
                  const std::vector<int>& val_idx, const std::vector<int>& test_idx,
                  std::uint64_t seed, int fold_index = -1,
                  const nn::ParamStore* warm_start = nullptr);

metrics::Metrics evaluate(const nn::Model& model, const std::vector<nn::GraphCache>& caches,
                          const std::vector<int>& indices);

RunReport cross_validate(const TrainConfig& cfg, const data::GraphDataset& ds);
RunReport train_holdout(const TrainConfig& cfg, const data::GraphDataset& ds);

std::string report_to_json(const RunReport& report);
void write_report(const RunReport& report, const std::string& out_dir);
void write_curves_csv(const FoldReport& fold, const std::string& path);

}  // namespace gladformer::train
