// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "rng.hpp"
#include "util.hpp"

namespace mmphase {

using nlohmann::json;

std::string to_string(MonitorKind monitor) {
    return monitor == MonitorKind::ValLoss ? "val_loss" : "train_loss";
}

MonitorKind monitor_from_string(const std::string& s) {
    if (s == "val_loss") return MonitorKind::ValLoss;
    if (s == "train_loss") return MonitorKind::TrainLoss;
    throw ConfigError("unknown monitor '" + s + "' (val_loss or train_loss)");
}

PlateauScheduler::PlateauScheduler(double initial_lr, const PlateauSchedule& schedule)
    : schedule_(schedule), lr_(initial_lr), best_(std::numeric_limits<double>::infinity()) {
    if (initial_lr <= 0.0) throw ConfigError("learning rate must be positive");
    if (schedule.factor <= 0.0 || schedule.factor >= 1.0)
        throw ConfigError("plateau factor must lie in (0, 1)");
    if (schedule.patience < 1) throw ConfigError("plateau patience must be at least 1");
    if (schedule.min_delta < 0.0) throw ConfigError("plateau min_delta must be nonnegative");
    if (schedule.min_lr < 0.0) throw ConfigError("plateau min_lr must be nonnegative");
}

double PlateauScheduler::observe(double monitored) {
    if (std::isnan(monitored)) throw std::runtime_error("monitored loss is NaN");
    if (monitored < best_ - schedule_.min_delta) {
        best_ = monitored;
        bad_epochs_ = 0;
    } else {
        ++bad_epochs_;
        if (bad_epochs_ >= schedule_.patience) {
            lr_ = std::max(lr_ * schedule_.factor, schedule_.min_lr);
            bad_epochs_ = 0;
        }
    }
    return lr_;
}

double plateau_lr(const std::vector<double>& monitored, double initial_lr,
                  const PlateauSchedule& schedule) {
    if (monitored.empty()) throw std::runtime_error("plateau scheduler needs at least one epoch");
    PlateauScheduler scheduler(initial_lr, schedule);
    for (double loss : monitored) scheduler.observe(loss);
    return scheduler.lr();
}

void validate(const TrainConfig& config) {
    if (config.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    PlateauScheduler probe(config.learning_rate, config.schedule);  // validates the schedule
    (void)probe;
    if (config.loss != "cross-entropy")
        throw ConfigError("unsupported loss '" + config.loss + "' (only cross-entropy)");
    if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (config.max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
    if (config.momentum < 0.0 || config.momentum >= 1.0)
        throw ConfigError("momentum must lie in [0, 1)");
    if (config.headline_metric != "accuracy" && config.headline_metric != "macro_f1" &&
        config.headline_metric != "weighted_f1")
        throw ConfigError("unknown headline metric '" + config.headline_metric + "'");
    validate(config.model);
}

std::string train_config_to_json(const TrainConfig& config) {
    json model = json::parse(fusion_config_to_json(config.model_kind, config.model));
    model.erase("format_version");
    model.erase("model_kind");
    json j{{"format_version", 1},
           {"model_kind", to_string(config.model_kind)},
           {"model", model},
           {"learning_rate", config.learning_rate},
           {"schedule",
            {{"factor", config.schedule.factor},
             {"patience", config.schedule.patience},
             {"min_delta", config.schedule.min_delta},
             {"min_lr", config.schedule.min_lr}}},
           {"loss", config.loss},
           {"batch_size", config.batch_size},
           {"max_epochs", config.max_epochs},
           {"seed", config.seed},
           {"monitor", to_string(config.monitor)},
           {"momentum", config.momentum},
           {"headline_metric", config.headline_metric}};
    return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    TrainConfig config;
    try {
        if (j.contains("model_kind"))
            config.model_kind = model_kind_from_string(j.at("model_kind").get<std::string>());
        if (j.contains("model")) {
            json model = j.at("model");
            model["model_kind"] = to_string(config.model_kind);
            auto [kind, fusion] = fusion_config_from_json(model.dump());
            (void)kind;
            config.model = fusion;
        }
        config.learning_rate = j.value("learning_rate", config.learning_rate);
        if (j.contains("schedule")) {
            const json& s = j.at("schedule");
            config.schedule.factor = s.value("factor", config.schedule.factor);
            config.schedule.patience = s.value("patience", config.schedule.patience);
            config.schedule.min_delta = s.value("min_delta", config.schedule.min_delta);
            config.schedule.min_lr = s.value("min_lr", config.schedule.min_lr);
        }
        config.loss = j.value("loss", config.loss);
        config.batch_size = j.value("batch_size", config.batch_size);
        config.max_epochs = j.value("max_epochs", config.max_epochs);
        config.seed = j.value("seed", config.seed);
        if (j.contains("monitor"))
            config.monitor = monitor_from_string(j.at("monitor").get<std::string>());
        config.momentum = j.value("momentum", config.momentum);
        config.headline_metric = j.value("headline_metric", config.headline_metric);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config;
}

std::string history_to_csv(const TrainHistory& history) {
    std::string out = "epoch,train_loss,val_loss,metric,lr\n";
    for (const EpochStats& e : history.epochs)
        out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
               format_double(e.val_loss) + "," + format_double(e.metric) + "," +
               format_double(e.lr) + "\n";
    return out;
}

namespace {

struct PreparedSet {
    std::vector<EncodedExample> examples;
    std::vector<int> labels;
    std::vector<std::string> ids;
};

// Frozen-encoder outputs are computed once up front: the trainable layers sit
// strictly after the frozen parts, so per-record features never change across
// epochs. Records that fail to encode are quarantined.
PreparedSet prepare(const Corpus& corpus, const std::vector<std::string>& ids, PhaseModel& model,
                    std::vector<std::string>& skipped) {
    std::map<std::string, const MultimodalRecord*> index;
    for (const MultimodalRecord& r : corpus.records) index.emplace(r.id, &r);
    PreparedSet set;
    for (const std::string& id : ids) {
        auto it = index.find(id);
        if (it == index.end())
            throw std::runtime_error("split references id '" + id + "' absent from the corpus");
        const MultimodalRecord& record = *it->second;
        if (!record.label)
            throw std::runtime_error("record '" + id + "' has no label; cannot train on it");
        try {
            set.examples.push_back(
                model.encode(record.text, corpus.image_root / record.image_path));
        } catch (const std::exception& e) {
            skipped.push_back(id + ": " + e.what());
            continue;
        }
        set.labels.push_back(phase_index(*record.label));
        set.ids.push_back(id);
    }
    return set;
}

double mean_loss(PhaseModel& model, const PreparedSet& set) {
    if (set.examples.empty()) return std::numeric_limits<double>::quiet_NaN();
    Rng unused(0);
    double total = 0.0;
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
        ModelForwardCache cache;
        Vec logits = model.logits(set.examples[i], false, unused, cache);
        total += cross_entropy_from_logits(logits, set.labels[i]);
    }
    return total / static_cast<double>(set.examples.size());
}

double headline_metric(PhaseModel& model, const PreparedSet& set, const std::string& name) {
    if (set.examples.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<PhaseLabel, PhaseLabel>> pairs;
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
        auto [label, probs] = model.predict_encoded(set.examples[i]);
        (void)probs;
        pairs.emplace_back(phase_from_index(set.labels[i]), label);
    }
    return metrics_from_confusion(confusion_matrix(pairs), name).headline();
}

std::map<std::string, Mat> snapshot_params(std::vector<ParamRef>& params) {
    std::map<std::string, Mat> snap;
    for (const ParamRef& p : params) snap.emplace(p.name, *p.value);
    return snap;
}

void restore_params(std::vector<ParamRef>& params, const std::map<std::string, Mat>& snap) {
    for (ParamRef& p : params) *p.value = snap.at(p.name);
}

}  // namespace

TrainOutcome train(const Corpus& corpus, const SplitAssignment& split, const TrainConfig& config) {
    validate(config);
    TrainOutcome outcome;
    outcome.model = std::make_unique<PhaseModel>(config.model_kind, config.model, config.seed);
    PhaseModel& model = *outcome.model;

    const std::vector<std::string> train_ids = split.ids_in("train");
    if (train_ids.empty()) throw std::runtime_error("train partition is empty");
    PreparedSet train_set = prepare(corpus, train_ids, model, outcome.skipped);
    if (train_set.examples.empty())
        throw std::runtime_error("every training record was skipped; nothing to train on (first: " +
                                 outcome.skipped.front() + ")");
    PreparedSet val_set = prepare(corpus, split.ids_in("test"), model, outcome.skipped);
    if (config.monitor == MonitorKind::ValLoss && val_set.examples.empty() &&
        config.max_epochs > 0)
        throw ConfigError(
            "validation partition is empty; monitor train_loss or provide a test partition");
    outcome.train_ids = train_set.ids;

    if (config.max_epochs == 0) return outcome;

    PlateauScheduler scheduler(config.learning_rate, config.schedule);
    std::vector<ParamRef> params = model.params();
    SgdState momentum_state;
    double best_monitored = std::numeric_limits<double>::infinity();
    std::map<std::string, Mat> best_weights = snapshot_params(params);

    std::vector<std::size_t> order(train_set.examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double lr = scheduler.lr();
        Rng shuffle_rng = Rng::stream(config.seed, {0x6570'6f63, static_cast<std::uint64_t>(epoch)});
        std::sort(order.begin(), order.end());
        shuffle_rng.shuffle(order);
        Rng dropout_rng = Rng::stream(config.seed, {0x64726f70, static_cast<std::uint64_t>(epoch)});

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(),
                                             start + static_cast<std::size_t>(config.batch_size));
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            zero_grads(params);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t idx = order[i];
                ModelForwardCache cache;
                Vec logits = model.logits(train_set.examples[idx], true, dropout_rng, cache);
                Vec grad_logits;
                loss_sum += cross_entropy_from_logits(logits, train_set.labels[idx], &grad_logits);
                model.backward(cache, grad_logits * inv_batch);
            }
            if (config.momentum > 0.0)
                sgd_step_momentum(params, lr, config.momentum, momentum_state);
            else
                sgd_step(params, lr);
        }
        const double train_loss = loss_sum / static_cast<double>(order.size());
        const double val_loss = mean_loss(model, val_set);
        const double metric = headline_metric(model, val_set, config.headline_metric);
        outcome.history.epochs.push_back({epoch, train_loss, val_loss, metric, lr});

        const double monitored = config.monitor == MonitorKind::ValLoss ? val_loss : train_loss;
        if (monitored < best_monitored) {
            best_monitored = monitored;
            best_weights = snapshot_params(params);
        }
        scheduler.observe(monitored);
    }
    restore_params(params, best_weights);
    return outcome;
}

CrossvalOutcome run_crossval(const Corpus& corpus, int k, const TrainConfig& config,
                             const FoldCallback& on_fold) {
    validate(config);
    std::vector<SplitAssignment> folds = kfold_split(corpus.labeled(), k, config.seed);
    CrossvalOutcome outcome;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        TrainOutcome fold = train(corpus, folds[i], config);
        EvalReport report = evaluate_model(*fold.model, corpus, folds[i], "test",
                                           config.headline_metric);
        outcome.fold_reports.push_back(report);
        if (on_fold) on_fold(static_cast<int>(i), report, *fold.model);
    }
    auto summarize = [&](const std::string& name, auto getter) {
        double mean = 0.0;
        for (const EvalReport& r : outcome.fold_reports) mean += getter(r);
        mean /= static_cast<double>(outcome.fold_reports.size());
        double var = 0.0;
        for (const EvalReport& r : outcome.fold_reports) {
            const double d = getter(r) - mean;
            var += d * d;
        }
        var /= static_cast<double>(outcome.fold_reports.size());
        outcome.summary[name] = {mean, std::sqrt(var)};
    };
    summarize("accuracy", [](const EvalReport& r) { return r.accuracy; });
    summarize("macro_f1", [](const EvalReport& r) { return r.macro_f1; });
    summarize("weighted_f1", [](const EvalReport& r) { return r.weighted_f1; });
    return outcome;
}

std::vector<ComparisonRow> compare_models(const Corpus& corpus, const SplitAssignment& split,
                                          const std::vector<std::pair<std::string, TrainConfig>>&
                                              configs) {
    if (configs.empty()) throw ConfigError("compare needs at least one model config");
    std::vector<ComparisonRow> rows;
    const std::string fingerprint = split.fingerprint();
    for (const auto& [name, config] : configs) {
        TrainOutcome outcome = train(corpus, split, config);
        ComparisonRow row;
        row.name = name;
        row.report = evaluate_model(*outcome.model, corpus, split, "test",
                                    config.headline_metric);
        row.split_fingerprint = fingerprint;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
    std::string out =
        "model,accuracy,macro_f1,weighted_f1,headline_metric,headline_value,"
        "reference_f1_percent,split_fingerprint\n";
    for (const ComparisonRow& row : rows) {
        std::string reference;
        if (!row.report.reference.empty())
            reference = format_double(row.report.reference.front().second);
        out += csv_escape(row.name) + "," + format_double(row.report.accuracy) + "," +
               format_double(row.report.macro_f1) + "," + format_double(row.report.weighted_f1) +
               "," + row.report.headline_metric_name + "," +
               format_double(row.report.headline()) + "," + reference + "," +
               row.split_fingerprint + "\n";
    }
    return out;
}

}  // namespace mmphase
