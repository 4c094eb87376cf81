// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Deterministic training: plain SGD, cross-entropy loss, reduce-on-plateau
// learning rate, best-weights-by-monitored-loss selection, and the k-fold
// cross-validation harness. All randomness derives from the config seed.

#ifndef MMPHASE_TRAINING_HPP
#define MMPHASE_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "evaluation.hpp"
#include "fusion.hpp"

namespace mmphase {

enum class MonitorKind { ValLoss, TrainLoss };

std::string to_string(MonitorKind monitor);
MonitorKind monitor_from_string(const std::string& s);

struct PlateauSchedule {
    double factor = 0.1;
    int patience = 3;
    double min_delta = 1e-3;
    double min_lr = 1e-6;
};

// Improvement means the monitored loss drops below best - min_delta. After
// `patience` consecutive non-improving epochs the rate is multiplied by
// `factor` (floored at min_lr) and the counter restarts.
class PlateauScheduler {
  public:
    PlateauScheduler(double initial_lr, const PlateauSchedule& schedule);

    double lr() const { return lr_; }

    // Records one epoch's monitored loss; returns the rate for the next epoch.
    double observe(double monitored);

  private:
    PlateauSchedule schedule_;
    double lr_;
    double best_;
    int bad_epochs_ = 0;
};

// Rate in effect after observing the whole loss history.
double plateau_lr(const std::vector<double>& monitored, double initial_lr,
                  const PlateauSchedule& schedule);

struct TrainConfig {
    ModelKind model_kind = ModelKind::Fusion;
    FusionConfig model;
    double learning_rate = 1e-3;
    PlateauSchedule schedule;
    std::string loss = "cross-entropy";
    int batch_size = 16;
    int max_epochs = 30;
    std::uint64_t seed = 42;
    MonitorKind monitor = MonitorKind::ValLoss;
    double momentum = 0.0;  // plain SGD by default
    std::string headline_metric = "weighted_f1";
};

void validate(const TrainConfig& config);
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);

struct EpochStats {
    int epoch = 0;          // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;  // NaN when the validation partition is empty
    double metric = 0.0;    // headline metric on validation; NaN likewise
    double lr = 0.0;        // rate in effect during this epoch
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

std::string history_to_csv(const TrainHistory& history);

struct TrainOutcome {
    std::unique_ptr<PhaseModel> model;
    TrainHistory history;
    std::vector<std::string> train_ids;  // records actually trained on
    std::vector<std::string> skipped;    // "id: reason" for quarantined records
};

// Trains on split partition "train", monitors partition "test". Records whose
// features cannot be computed are skipped and logged; losing every training
// record is fatal. Weights with the best monitored loss are restored at the
// end.
TrainOutcome train(const Corpus& corpus, const SplitAssignment& split, const TrainConfig& config);

struct CrossvalOutcome {
    std::vector<EvalReport> fold_reports;
    // metric name -> (mean, population standard deviation)
    std::map<std::string, std::pair<double, double>> summary;
};

using FoldCallback = std::function<void(int fold_index, const EvalReport& report,
                                        PhaseModel& model)>;

// k independent trainings. The callback runs as each fold completes, so a
// failing fold still leaves the earlier folds' artifacts behind.
CrossvalOutcome run_crossval(const Corpus& corpus, int k, const TrainConfig& config,
                             const FoldCallback& on_fold = {});

// Trains one model per named config on a shared split and reports each row
// next to any published reference value for that architecture.
struct ComparisonRow {
    std::string name;
    EvalReport report;
    std::string split_fingerprint;
};

std::vector<ComparisonRow> compare_models(const Corpus& corpus, const SplitAssignment& split,
                                          const std::vector<std::pair<std::string, TrainConfig>>&
                                              configs);

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

}  // namespace mmphase

#endif
