// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// mmphase command-line tool. Flags are assembled into a JSON options object
// and handed to the shared library through its C interface; all behavior
// lives behind mmp_run().

#include <cstdint>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mmphase/mmphase.h"

using nlohmann::json;

namespace {

struct GlobalFlags {
    std::uint64_t seed = 42;
    std::string out;
    std::string config;
    bool verbose = false;

    CLI::Option* out_opt = nullptr;
    CLI::Option* config_opt = nullptr;
};

// Collects a subcommand's flags into a JSON options object. A key is emitted
// only when its flag was actually passed, so library-side defaults stay in
// charge.
struct OptionSet {
    json options = json::object();
    std::vector<std::function<void()>> appliers;

    template <typename T>
    CLI::Option* add(CLI::App* sub, const std::string& flag, const std::string& key,
                     const std::string& help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = sub->add_option(flag, *value, help);
        appliers.push_back([this, key, value, opt] {
            if (opt->count() > 0) options[key] = *value;
        });
        return opt;
    }

    json resolve() {
        for (const auto& apply : appliers) apply();
        return options;
    }
};

int run(const std::string& command, json options, const GlobalFlags& g) {
    options["seed"] = g.seed;
    if (g.out_opt->count() > 0) options["out"] = g.out;
    if (g.config_opt->count() > 0) options["config_file"] = g.config;
    const std::string options_text = options.dump();
    if (g.verbose) std::cerr << "mmphase " << command << " " << options_text << "\n";

    char* result = nullptr;
    mmp_status status = mmp_run(command.c_str(), options_text.c_str(), &result);
    if (status != MMP_OK) {
        std::cerr << "error: " << mmp_last_error() << "\n";
        return static_cast<int>(status);
    }
    if (result != nullptr) {
        std::cout << result;
        mmp_string_free(result);
    }
    return 0;
}

// Flags shared by train, crossval and compare.
void add_train_flags(CLI::App* sub, OptionSet& set) {
    set.add<std::string>(sub, "--model-kind", "model_kind",
                         "text-only, image-only or fusion (default fusion)");
    set.add<std::string>(sub, "--text-encoder", "text_encoder",
                         "tiny-test or pretrained-transformer");
    set.add<std::string>(sub, "--backbone", "backbone",
                         "tiny-test, vgg19, resnet50, inception-v3 or inception-v4");
    set.add<double>(sub, "--learning-rate", "learning_rate",
                    "initial learning rate (default 0.001)");
    set.add<int>(sub, "--batch-size", "batch_size", "mini-batch size (default 16)");
    set.add<int>(sub, "--max-epochs", "max_epochs", "maximum training epochs (default 30)");
    set.add<double>(sub, "--momentum", "momentum", "SGD momentum (default 0)");
    set.add<std::string>(sub, "--monitor", "monitor",
                         "loss watched by the plateau schedule: val_loss or train_loss");
    set.add<std::string>(sub, "--headline-metric", "headline_metric",
                         "headline metric name (default weighted_f1)");
}

void add_corpus_flags(CLI::App* sub, OptionSet& set) {
    set.add<std::string>(sub, "--corpus", "corpus", "corpus manifest (line-delimited JSON)")
        ->required();
    set.add<std::string>(sub, "--images", "images",
                         "image root directory (default: manifest directory)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multimodal phase classification for refugee-related social media posts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mmp_version());

    GlobalFlags g;
    app.add_option("--seed", g.seed, "random seed for every stochastic step")
        ->capture_default_str();
    g.out_opt = app.add_option("--out", g.out, "output directory for artifacts");
    g.config_opt = app.add_option("--config", g.config, "training config JSON file");
    app.add_flag("--verbose", g.verbose, "echo the resolved options before running");

    int exit_code = 0;
    std::vector<std::shared_ptr<OptionSet>> sets;
    auto make_command = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        auto set = std::make_shared<OptionSet>();
        sets.push_back(set);
        sub->callback([&, name, set] { exit_code = run(name, set->resolve(), g); });
        return std::make_pair(sub, set);
    };

    {
        auto [sub, set] = make_command(
            "ingest", "read a raw manifest, drop bad rows and duplicates, write a clean corpus");
        set->add<std::string>(sub, "--manifest", "manifest",
                              "raw manifest file (line-delimited JSON)")
            ->required();
        set->add<std::string>(sub, "--images", "images", "image root directory")->required();
    }
    {
        auto [sub, set] = make_command("stats", "class distribution and corpus fingerprint");
        add_corpus_flags(sub, *set);
    }
    {
        auto [sub, set] =
            make_command("split", "write a stratified train/test or k-fold split");
        add_corpus_flags(sub, *set);
        set->add<std::string>(sub, "--mode", "mode", "holdout (default) or kfold");
        set->add<double>(sub, "--train-fraction", "train_fraction",
                         "train share for holdout mode (default 0.8)");
        set->add<int>(sub, "--folds", "folds", "fold count for kfold mode (default 5)");
    }
    {
        auto [sub, set] = make_command(
            "synth", "generate the synthetic complementary-modality benchmark corpus");
        set->add<int>(sub, "--n", "n", "number of records (default 1000, min 50)");
        set->add<int>(sub, "--image-size", "image_size",
                      "square image edge in pixels (default 32)");
    }
    {
        auto [sub, set] = make_command("train", "train one model and evaluate its test split");
        add_corpus_flags(sub, *set);
        add_train_flags(sub, *set);
        set->add<std::string>(sub, "--split", "split",
                              "existing split file (default: fresh stratified split)");
        set->add<double>(sub, "--train-fraction", "train_fraction",
                         "train share when splitting here (default 0.8)");
    }
    {
        auto [sub, set] = make_command(
            "crossval", "stratified k-fold cross-validation with a summary table");
        add_corpus_flags(sub, *set);
        add_train_flags(sub, *set);
        set->add<int>(sub, "--folds", "folds", "fold count (default 5)");
    }
    {
        auto [sub, set] = make_command("evaluate", "score a saved model on a corpus partition");
        add_corpus_flags(sub, *set);
        set->add<std::string>(sub, "--model", "model",
                              "model directory written by train/crossval")
            ->required();
        set->add<std::string>(sub, "--split", "split",
                              "split file naming the partition (default: whole corpus)");
        set->add<std::string>(sub, "--partition", "partition",
                              "partition tag to score (default test)");
        set->add<std::string>(sub, "--headline-metric", "headline_metric",
                              "headline metric name (default weighted_f1)");
    }
    {
        auto [sub, set] = make_command(
            "compare", "train several architectures on one split and tabulate their scores");
        add_corpus_flags(sub, *set);
        add_train_flags(sub, *set);
        set->add<std::string>(sub, "--preset", "preset",
                              "tiny-trio (assetless) or reference-8 (needs converted weights)");
        set->add<std::vector<std::string>>(sub, "--model-config", "configs",
                                           "training config JSON file (repeatable)");
        set->add<std::string>(sub, "--split", "split",
                              "existing split file shared by every row");
        set->add<double>(sub, "--train-fraction", "train_fraction",
                         "train share when splitting here (default 0.8)");
    }
    {
        auto [sub, set] = make_command(
            "generalize", "apply a trained model to a different corpus without retraining");
        add_corpus_flags(sub, *set);
        set->add<std::string>(sub, "--model", "model",
                              "model directory (must contain training_ids.txt)")
            ->required();
        set->add<std::string>(sub, "--source-tag", "source_tag",
                              "report tag for the training corpus (default source-train)");
        set->add<std::string>(sub, "--target-tag", "target_tag",
                              "report tag for the new corpus (default target)");
        set->add<std::string>(sub, "--headline-metric", "headline_metric",
                              "headline metric name (default weighted_f1)");
    }
    {
        auto [sub, set] = make_command(
            "lexical", "per-class lexicon profile (mean percent of matching tokens)");
        add_corpus_flags(sub, *set);
        set->add<std::vector<std::string>>(sub, "--lexicon", "lexicons",
                                           "lexicon file (repeatable)")
            ->required();
    }
    {
        auto [sub, set] = make_command("predict", "classify a single post");
        set->add<std::string>(sub, "--model", "model", "model directory")->required();
        set->add<std::string>(sub, "--text", "text", "post text");
        set->add<std::string>(sub, "--image", "image", "post image file");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems exit 2; --help/--version exit 0
    }
    return exit_code;
}
