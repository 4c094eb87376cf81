// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"

#include "testutil.hpp"
#include "util.hpp"

using namespace mmphase;
using mmptest::TempDir;

namespace {

TrainConfig quick_config() {
    TrainConfig config;
    config.model_kind = ModelKind::Fusion;
    config.model.text.kind = TextEncoderKind::TinyTest;
    config.model.text.recurrent_hidden = 8;
    config.model.text.projection_dim = 8;
    config.model.image = BackboneSpec::for_kind(BackboneKind::TinyTest);
    config.model.image.projection_dim = 8;
    config.model.post_fusion_dense = 8;
    config.max_epochs = 3;
    config.batch_size = 4;
    return config;
}

// Corpus with `per_class` labeled records per class; texts and image colors
// vary by class so a few epochs have signal to latch onto.
Corpus small_corpus(const TempDir& dir, std::size_t per_class) {
    static const char* kWords[kNumClasses] = {"boats landing", "queue at the office",
                                              "clinic visit", "language class",
                                              "statistics chart"};
    Corpus corpus;
    corpus.image_root = dir.path();
    for (int c = 0; c < kNumClasses; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::string name = "t" + std::to_string(c) + "-" + std::to_string(i);
            const std::string rel = "images/" + name + ".png";
            mmptest::write_solid_png(dir / rel, 8, static_cast<std::uint8_t>(50 * c),
                                     static_cast<std::uint8_t>(255 - 50 * c),
                                     static_cast<std::uint8_t>(30 * i));
            corpus.records.push_back(mmptest::make_record(
                name, std::string(kWords[c]) + " " + std::to_string(i), phase_from_index(c), rel));
        }
    }
    return corpus;
}

SplitAssignment all_train_split(const Corpus& corpus) {
    SplitAssignment split;
    for (const auto& r : corpus.records) split.partition[r.id] = "train";
    return split;
}

}  // namespace

TEST_CASE("train config defaults and validation") {
    TrainConfig config;  // defaults
    CHECK(config.learning_rate == doctest::Approx(1e-3));
    CHECK(config.batch_size == 16);
    CHECK(config.max_epochs == 30);
    CHECK(config.seed == 42);
    CHECK(config.momentum == 0.0);
    CHECK(config.loss == "cross-entropy");
    CHECK(config.monitor == MonitorKind::ValLoss);
    CHECK(config.headline_metric == "weighted_f1");
    CHECK(config.schedule.factor == doctest::Approx(0.1));
    CHECK(config.schedule.patience == 3);
    CHECK(config.schedule.min_delta == doctest::Approx(1e-3));
    CHECK(config.schedule.min_lr == doctest::Approx(1e-6));

    TrainConfig bad = quick_config();
    SUBCASE("learning rate") {
        bad.learning_rate = 0.0;
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("loss") {
        bad.loss = "hinge";
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("batch size") {
        bad.batch_size = 0;
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("epochs") {
        bad.max_epochs = -1;
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("momentum") {
        bad.momentum = 1.0;
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("headline metric") {
        bad.headline_metric = "f2";
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("schedule factor") {
        bad.schedule.factor = 1.5;
        CHECK_THROWS_AS(validate(bad), ConfigError);
    }
    SUBCASE("quick config itself is fine") { CHECK_NOTHROW(validate(bad)); }
}

TEST_CASE("train config json round-trip") {
    TrainConfig config = quick_config();
    config.learning_rate = 0.0125;
    config.momentum = 0.5;
    config.monitor = MonitorKind::TrainLoss;
    config.headline_metric = "macro_f1";
    config.schedule.patience = 5;
    config.seed = 1234;

    std::string text = train_config_to_json(config);
    TrainConfig back = train_config_from_json(text);
    CHECK(back.model_kind == config.model_kind);
    CHECK(back.learning_rate == doctest::Approx(0.0125));
    CHECK(back.momentum == doctest::Approx(0.5));
    CHECK(back.monitor == MonitorKind::TrainLoss);
    CHECK(back.headline_metric == "macro_f1");
    CHECK(back.schedule.patience == 5);
    CHECK(back.seed == 1234);
    CHECK(back.batch_size == config.batch_size);
    CHECK(back.model.text.recurrent_hidden == 8);
    CHECK(back.model.image.kind == BackboneKind::TinyTest);
    CHECK(train_config_to_json(back) == text);

    CHECK_THROWS(train_config_from_json("not json"));
}

TEST_CASE("history csv carries one line per epoch") {
    TrainHistory history;
    history.epochs.push_back({1, 1.5, 1.6, 0.2, 0.001});
    history.epochs.push_back({2, 1.2, 1.3, 0.4, 0.001});
    std::string csv = history_to_csv(history);
    CHECK(csv.rfind("epoch,train_loss,val_loss,metric,lr\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n2,") != std::string::npos);
}

TEST_CASE("training runs, monitors and stays deterministic") {
    TempDir dir;
    Corpus corpus = small_corpus(dir, 4);
    SplitAssignment split = stratified_split(corpus.records, 0.75, 9);
    TrainConfig config = quick_config();
    config.seed = 9;

    TrainOutcome first = train(corpus, split, config);
    REQUIRE(first.model != nullptr);
    CHECK(first.history.epochs.size() == 3);
    CHECK(first.skipped.empty());
    CHECK(first.train_ids.size() == 15);

    for (std::size_t i = 0; i < first.history.epochs.size(); ++i) {
        const EpochStats& e = first.history.epochs[i];
        CHECK(e.epoch == static_cast<int>(i) + 1);
        CHECK(std::isfinite(e.train_loss));
        CHECK(std::isfinite(e.val_loss));
        if (i > 0) CHECK(e.lr <= first.history.epochs[i - 1].lr);  // never increases
    }

    SUBCASE("second run is bit-identical") {
        TrainOutcome second = train(corpus, split, config);
        CHECK(history_to_csv(first.history) == history_to_csv(second.history));
        std::vector<ParamRef> pa = first.model->params();
        std::vector<ParamRef> pb = second.model->params();
        REQUIRE(pa.size() == pb.size());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            CHECK(pa[i].name == pb[i].name);
            CHECK((*pa[i].value - *pb[i].value).norm() == 0.0);
        }
    }

    SUBCASE("a different seed changes the trajectory") {
        TrainConfig other = config;
        other.seed = 10;
        TrainOutcome second = train(corpus, split, other);
        CHECK(history_to_csv(first.history) != history_to_csv(second.history));
    }

    SUBCASE("max_epochs 0 prepares but does not step") {
        TrainConfig frozen = config;
        frozen.max_epochs = 0;
        TrainOutcome outcome = train(corpus, split, frozen);
        CHECK(outcome.history.epochs.empty());
        CHECK(outcome.model != nullptr);
        CHECK(outcome.train_ids.size() == 15);
    }
}

TEST_CASE("monitoring rules") {
    TempDir dir;
    Corpus corpus = small_corpus(dir, 2);

    SUBCASE("val_loss monitoring needs a test partition") {
        TrainConfig config = quick_config();
        config.max_epochs = 1;
        CHECK_THROWS_AS(train(corpus, all_train_split(corpus), config), ConfigError);
    }

    SUBCASE("train_loss monitoring works without one") {
        TrainConfig config = quick_config();
        config.max_epochs = 2;
        config.monitor = MonitorKind::TrainLoss;
        TrainOutcome outcome = train(corpus, all_train_split(corpus), config);
        CHECK(outcome.history.epochs.size() == 2);
        CHECK(std::isnan(outcome.history.epochs[0].val_loss));  // no validation set
        CHECK(outcome.train_ids.size() == corpus.records.size());
    }

    SUBCASE("empty train partition is fatal") {
        SplitAssignment split;
        for (const auto& r : corpus.records) split.partition[r.id] = "test";
        TrainConfig config = quick_config();
        CHECK_THROWS_WITH_AS(train(corpus, split, config), doctest::Contains("train partition"),
                             std::runtime_error);
    }
}

TEST_CASE("records that fail to encode are skipped and logged") {
    TempDir dir;
    Corpus corpus = small_corpus(dir, 2);
    // One record pointing at a file that does not exist.
    corpus.records.push_back(
        mmptest::make_record("broken", "torn picture", PhaseLabel::Arrival, "images/gone.png"));
    SplitAssignment split = all_train_split(corpus);
    TrainConfig config = quick_config();
    config.max_epochs = 1;
    config.monitor = MonitorKind::TrainLoss;

    TrainOutcome outcome = train(corpus, split, config);
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].rfind("broken: ", 0) == 0);
    CHECK(outcome.train_ids.size() == corpus.records.size() - 1);

    SUBCASE("losing every record is fatal") {
        Corpus hopeless;
        hopeless.image_root = dir.path();
        hopeless.records.push_back(
            mmptest::make_record("a", "one", PhaseLabel::Arrival, "images/gone.png"));
        hopeless.records.push_back(
            mmptest::make_record("b", "two", PhaseLabel::Asylum, "images/также.png"));
        CHECK_THROWS_WITH_AS(train(hopeless, all_train_split(hopeless), config),
                             doctest::Contains("nothing to train on"), std::runtime_error);
    }
}

TEST_CASE("cross-validation aggregates per-fold reports") {
    TempDir dir;
    Corpus corpus = small_corpus(dir, 4);  // 20 records
    TrainConfig config = quick_config();
    config.max_epochs = 2;
    config.seed = 33;

    std::vector<int> seen_folds;
    std::vector<double> callback_headlines;
    CrossvalOutcome outcome =
        run_crossval(corpus, 2, config, [&](int fold, const EvalReport& report, PhaseModel& model) {
            seen_folds.push_back(fold);
            callback_headlines.push_back(report.headline());
            CHECK(model.kind() == ModelKind::Fusion);
        });

    REQUIRE(outcome.fold_reports.size() == 2);
    CHECK(seen_folds == std::vector<int>{0, 1});
    for (std::size_t i = 0; i < outcome.fold_reports.size(); ++i) {
        CHECK(outcome.fold_reports[i].total() == 10);  // half the corpus held out
        CHECK(outcome.fold_reports[i].headline() == doctest::Approx(callback_headlines[i]));
    }

    for (const char* name : {"accuracy", "macro_f1", "weighted_f1"}) {
        REQUIRE(outcome.summary.count(name) == 1);
        // Population mean/stddev over the folds.
        double mean = 0.0;
        auto value_of = [&](const EvalReport& r) {
            if (std::string(name) == "accuracy") return r.accuracy;
            if (std::string(name) == "macro_f1") return r.macro_f1;
            return r.weighted_f1;
        };
        for (const auto& r : outcome.fold_reports) mean += value_of(r);
        mean /= 2.0;
        double var = 0.0;
        for (const auto& r : outcome.fold_reports) {
            const double d = value_of(r) - mean;
            var += d * d;
        }
        var /= 2.0;
        CHECK(outcome.summary[name].first == doctest::Approx(mean).epsilon(1e-12));
        CHECK(outcome.summary[name].second == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
}

TEST_CASE("model comparison trains every entry on the same split") {
    TempDir dir;
    Corpus corpus = small_corpus(dir, 3);
    SplitAssignment split = stratified_split(corpus.records, 2.0 / 3.0, 4);

    TrainConfig fusion = quick_config();
    fusion.max_epochs = 1;
    TrainConfig text_only = fusion;
    text_only.model_kind = ModelKind::TextOnly;

    auto rows = compare_models(corpus, split,
                               {{"fusion", fusion}, {"text-baseline", text_only}});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "fusion");
    CHECK(rows[1].name == "text-baseline");
    CHECK(rows[0].split_fingerprint == rows[1].split_fingerprint);
    CHECK(rows[0].split_fingerprint == split.fingerprint());
    CHECK(rows[0].report.total() == 5);

    std::string csv = comparison_to_csv(rows);
    CHECK(csv.rfind("model,", 0) == 0);
    CHECK(csv.find("text-baseline") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    CHECK_THROWS_AS(compare_models(corpus, split, {}), ConfigError);
}
