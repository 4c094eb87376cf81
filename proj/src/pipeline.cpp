// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "corpus.hpp"
#include "evaluation.hpp"
#include "lexical.hpp"
#include "synth.hpp"
#include "training.hpp"
#include "util.hpp"

namespace mmphase {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// --- Options plumbing -------------------------------------------------------

json parse_options(const std::string& options_json) {
    if (trim(options_json).empty()) return json::object();
    json j;
    try {
        j = json::parse(options_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("options are not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("options must be a JSON object");
    return j;
}

std::string require_string(const json& opts, const char* key) {
    if (!opts.contains(key) || !opts.at(key).is_string() ||
        opts.at(key).get<std::string>().empty())
        throw ConfigError(std::string("missing required option '") + key + "'");
    return opts.at(key).get<std::string>();
}

fs::path require_dir(const json& opts, const char* key) {
    fs::path p = require_string(opts, key);
    if (!fs::is_directory(p))
        throw ConfigError(std::string("option '") + key + "' is not a directory: " + p.string());
    return p;
}

fs::path require_file(const json& opts, const char* key) {
    fs::path p = require_string(opts, key);
    if (!fs::is_regular_file(p))
        throw ConfigError(std::string("option '") + key + "' is not a file: " + p.string());
    return p;
}

std::uint64_t seed_of(const json& opts) { return opts.value("seed", std::uint64_t{42}); }

fs::path out_dir_of(const json& opts) {
    fs::path out = require_string(opts, "out");
    fs::create_directories(out);
    return out;
}

// Image root defaults to the manifest's own directory.
fs::path image_root_of(const json& opts, const fs::path& corpus_file) {
    if (opts.contains("images")) return require_dir(opts, "images");
    return corpus_file.parent_path();
}

IngestResult load_corpus(const json& opts, bool verify_images) {
    fs::path corpus_file = require_file(opts, "corpus");
    fs::path images = image_root_of(opts, corpus_file);
    return read_manifest(corpus_file, images, verify_images);
}

void warn_rejections(const IngestResult& loaded) {
    for (const Rejection& r : loaded.rejections)
        std::cerr << "warning: line " << r.line << " (" << (r.id.empty() ? "?" : r.id)
                  << "): " << r.reason << "\n";
}

void write_run_manifest(const fs::path& out, const std::string& command, const json& options,
                        const std::vector<std::string>& artifacts,
                        const std::string& corpus_fingerprint = {}) {
    json manifest{{"command", command},
                  {"tool_version", kToolVersion},
                  {"options", options},
                  {"artifacts", artifacts}};
    if (options.contains("seed")) manifest["seed"] = options.at("seed");
    if (!corpus_fingerprint.empty()) manifest["corpus_fingerprint"] = corpus_fingerprint;
    write_text_file(out / "run.json", manifest.dump(2) + "\n");
}

json stats_to_json(const CorpusStats& stats) {
    json per_class = json::object();
    for (int c = 0; c < kNumClasses; ++c)
        per_class[std::string(phase_slug(phase_from_index(c)))] =
            stats.per_class[static_cast<std::size_t>(c)];
    return json{{"total", stats.total},
                {"per_class", per_class},
                {"dropped_duplicates", stats.dropped_duplicates},
                {"dropped_no_image", stats.dropped_no_image},
                {"multimodal_fraction", stats.multimodal_fraction}};
}

// --- Train config assembly ---------------------------------------------------

TextEncoderConfig text_config_for(const std::string& kind_name) {
    if (text_encoder_kind_from_string(kind_name) == TextEncoderKind::PretrainedTransformer)
        return pretrained_text_config();
    return TextEncoderConfig{};
}

TrainConfig train_config_from_options(const json& opts) {
    TrainConfig config;
    if (opts.contains("config_file"))
        config = train_config_from_json(read_text_file(require_file(opts, "config_file")));
    if (opts.contains("model_kind"))
        config.model_kind = model_kind_from_string(opts.at("model_kind").get<std::string>());
    if (opts.contains("text_encoder")) {
        TextEncoderConfig base = text_config_for(opts.at("text_encoder").get<std::string>());
        base.projection_dim = config.model.text.projection_dim;
        base.pooling = config.model.text.pooling;
        config.model.text = base;
    }
    if (opts.contains("backbone"))
        config.model.image = BackboneSpec::for_kind(
            backbone_kind_from_string(opts.at("backbone").get<std::string>()));
    config.learning_rate = opts.value("learning_rate", config.learning_rate);
    config.batch_size = opts.value("batch_size", config.batch_size);
    config.max_epochs = opts.value("max_epochs", config.max_epochs);
    if (opts.contains("monitor"))
        config.monitor = monitor_from_string(opts.at("monitor").get<std::string>());
    config.momentum = opts.value("momentum", config.momentum);
    config.headline_metric = opts.value("headline_metric", config.headline_metric);
    config.seed = seed_of(opts);
    validate(config);
    return config;
}

SplitAssignment split_for(const json& opts, const Corpus& corpus, std::uint64_t seed) {
    if (opts.contains("split")) return read_split(require_file(opts, "split"));
    const double fraction = opts.value("train_fraction", 0.8);
    return stratified_split(corpus.labeled(), fraction, seed);
}

// Tag every labeled record as one partition (used when evaluating a whole
// corpus without a stored split).
SplitAssignment whole_corpus_split(const Corpus& corpus, const std::string& tag) {
    SplitAssignment split;
    for (const MultimodalRecord& r : corpus.labeled()) split.partition[r.id] = tag;
    return split;
}

void save_model_dir(PhaseModel& model, const std::vector<std::string>& train_ids,
                    const fs::path& dir) {
    model.save(dir);
    std::string ids;
    for (const std::string& id : train_ids) ids += id + "\n";
    write_text_file(dir / "training_ids.txt", ids);
}

std::vector<std::string> load_training_ids(const fs::path& model_dir) {
    fs::path file = model_dir / "training_ids.txt";
    if (!fs::is_regular_file(file))
        throw std::runtime_error(
            "model directory lacks training_ids.txt (needed for the leakage guard): " +
            model_dir.string());
    std::ifstream in(file);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

void write_skipped_log(const fs::path& out, const std::vector<std::string>& skipped,
                       std::vector<std::string>& artifacts) {
    if (skipped.empty()) return;
    std::string log;
    for (const std::string& s : skipped) log += s + "\n";
    write_text_file(out / "skipped.log", log);
    artifacts.push_back("skipped.log");
    std::cerr << "warning: skipped " << skipped.size() << " record(s); see skipped.log\n";
}

// --- Commands ----------------------------------------------------------------

json cmd_ingest(const json& opts) {
    fs::path manifest = require_file(opts, "manifest");
    fs::path images = require_dir(opts, "images");
    fs::path out = out_dir_of(opts);

    IngestResult ingested = ingest_manifest(manifest, images);
    DedupResult deduped = deduplicate(ingested.corpus.records);
    Corpus corpus;
    corpus.image_root = images;
    corpus.records = deduped.records;

    CorpusStats stats{};
    const auto labeled = corpus.labeled();
    if (!labeled.empty()) stats = class_distribution(labeled);
    stats.total = corpus.records.size();
    stats.dropped_duplicates = deduped.dropped_duplicates;
    for (const Rejection& r : ingested.rejections)
        if (r.reason == "no image" || r.reason == "unreadable image") ++stats.dropped_no_image;
    const std::size_t kept_plus_dropped = corpus.records.size() + stats.dropped_no_image;
    stats.multimodal_fraction =
        kept_plus_dropped == 0
            ? 1.0
            : static_cast<double>(corpus.records.size()) / static_cast<double>(kept_plus_dropped);

    write_manifest(corpus, out / "corpus.jsonl");
    write_text_file(out / "stats.json", stats_to_json(stats).dump(2) + "\n");
    std::vector<std::string> artifacts{"corpus.jsonl", "stats.json"};
    if (!ingested.rejections.empty()) {
        std::string log;
        for (const Rejection& r : ingested.rejections)
            log += "line " + std::to_string(r.line) + "\t" + (r.id.empty() ? "-" : r.id) + "\t" +
                   r.reason + "\n";
        write_text_file(out / "rejections.log", log);
        artifacts.push_back("rejections.log");
    }
    write_run_manifest(out, "ingest", opts, artifacts, corpus_fingerprint(corpus));
    json result = stats_to_json(stats);
    result["rejections"] = ingested.rejections.size();
    result["out"] = out.string();
    return result;
}

json cmd_stats(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    const Corpus& corpus = loaded.corpus;
    CorpusStats stats{};
    const auto labeled = corpus.labeled();
    if (!labeled.empty()) stats = class_distribution(labeled);
    stats.total = corpus.records.size();
    json result = stats_to_json(stats);
    result["labeled"] = labeled.size();
    result["unlabeled"] = corpus.unlabeled_count();
    result["fingerprint"] = corpus_fingerprint(corpus);
    if (opts.contains("out")) {
        fs::path out = out_dir_of(opts);
        write_text_file(out / "stats.json", result.dump(2) + "\n");
        write_run_manifest(out, "stats", opts, {"stats.json"}, corpus_fingerprint(corpus));
        result["out"] = out.string();
    }
    return result;
}

json cmd_split(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    const std::uint64_t seed = seed_of(opts);
    const std::string mode = opts.value("mode", std::string("holdout"));
    SplitAssignment split;
    if (mode == "holdout") {
        split = stratified_split(loaded.corpus.labeled(), opts.value("train_fraction", 0.8), seed);
    } else if (mode == "kfold") {
        split = kfold_tags(kfold_split(loaded.corpus.labeled(), opts.value("folds", 5), seed));
    } else {
        throw ConfigError("unknown split mode '" + mode + "' (holdout or kfold)");
    }
    write_split(split, out / "split.tsv");
    write_run_manifest(out, "split", opts, {"split.tsv"}, corpus_fingerprint(loaded.corpus));
    json counts = json::object();
    for (const auto& [id, tag] : split.partition) {
        (void)id;
        counts[tag] = counts.value(tag, 0) + 1;
    }
    return json{{"out", out.string()},
                {"mode", mode},
                {"partitions", counts},
                {"fingerprint", split.fingerprint()}};
}

json cmd_synth(const json& opts) {
    SynthConfig config;
    config.out_dir = out_dir_of(opts);
    config.n = opts.value("n", config.n);
    config.seed = seed_of(opts);
    config.image_size = opts.value("image_size", config.image_size);
    SynthResult result = generate_synthetic_corpus(config);
    IngestResult loaded = read_manifest(result.manifest_path, result.image_root, false);
    write_run_manifest(config.out_dir, "synth", opts, {"manifest.jsonl", "images/"},
                       corpus_fingerprint(loaded.corpus));
    json per_class = json::object();
    for (int c = 0; c < kNumClasses; ++c)
        per_class[std::string(phase_slug(phase_from_index(c)))] =
            result.per_class[static_cast<std::size_t>(c)];
    return json{{"out", config.out_dir.string()},
                {"manifest", result.manifest_path.string()},
                {"records", result.records},
                {"per_class", per_class}};
}

json cmd_train(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    TrainConfig config = train_config_from_options(opts);
    SplitAssignment split = split_for(opts, loaded.corpus, config.seed);

    TrainOutcome outcome = train(loaded.corpus, split, config);
    std::vector<std::string> artifacts;
    save_model_dir(*outcome.model, outcome.train_ids, out / "model");
    artifacts.push_back("model/");
    write_text_file(out / "history.csv", history_to_csv(outcome.history));
    artifacts.push_back("history.csv");
    if (!opts.contains("split")) {
        write_split(split, out / "split.tsv");
        artifacts.push_back("split.tsv");
    }
    write_text_file(out / "train_config.json", train_config_to_json(config));
    artifacts.push_back("train_config.json");
    write_skipped_log(out, outcome.skipped, artifacts);

    json result{{"out", out.string()},
                {"epochs", outcome.history.epochs.size()},
                {"trained_records", outcome.train_ids.size()}};
    if (!split.ids_in("test").empty()) {
        EvalReport report = evaluate_model(*outcome.model, loaded.corpus, split, "test",
                                           config.headline_metric);
        write_text_file(out / "report.json", eval_report_to_json(report));
        write_text_file(out / "report.txt", eval_report_to_text(report));
        artifacts.push_back("report.json");
        artifacts.push_back("report.txt");
        result["headline_metric"] = report.headline_metric_name;
        result["headline_value"] = report.headline();
        result["accuracy"] = report.accuracy;
        result["macro_f1"] = report.macro_f1;
        result["weighted_f1"] = report.weighted_f1;
    }
    write_run_manifest(out, "train", opts, artifacts, corpus_fingerprint(loaded.corpus));
    return result;
}

json cmd_crossval(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    TrainConfig config = train_config_from_options(opts);
    const int folds = opts.value("folds", 5);

    std::vector<std::string> artifacts;
    CrossvalOutcome outcome = run_crossval(
        loaded.corpus, folds, config,
        [&](int fold_index, const EvalReport& report, PhaseModel& model) {
            const std::string dir = "fold-" + std::to_string(fold_index + 1);
            model.save(out / dir / "model");
            write_text_file(out / dir / "report.json", eval_report_to_json(report));
            write_text_file(out / dir / "report.txt", eval_report_to_text(report));
            artifacts.push_back(dir + "/");
        });

    json summary = json::object();
    for (const auto& [metric, stats] : outcome.summary)
        summary[metric] = {{"mean", stats.first}, {"stddev", stats.second}};
    json fold_rows = json::array();
    for (std::size_t i = 0; i < outcome.fold_reports.size(); ++i)
        fold_rows.push_back({{"fold", i + 1},
                             {"accuracy", outcome.fold_reports[i].accuracy},
                             {"macro_f1", outcome.fold_reports[i].macro_f1},
                             {"weighted_f1", outcome.fold_reports[i].weighted_f1}});
    json summary_doc{{"folds", fold_rows}, {"summary", summary}};
    write_text_file(out / "summary.json", summary_doc.dump(2) + "\n");
    artifacts.push_back("summary.json");
    write_run_manifest(out, "crossval", opts, artifacts, corpus_fingerprint(loaded.corpus));
    summary_doc["out"] = out.string();
    return summary_doc;
}

json cmd_evaluate(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path model_dir = require_dir(opts, "model");
    fs::path out = out_dir_of(opts);
    auto model = PhaseModel::load(model_dir);
    const std::string partition = opts.value("partition", std::string("test"));
    SplitAssignment split = opts.contains("split")
                                ? read_split(require_file(opts, "split"))
                                : whole_corpus_split(loaded.corpus, partition);
    const std::string headline = opts.value("headline_metric", std::string("weighted_f1"));
    EvalReport report = evaluate_model(*model, loaded.corpus, split, partition, headline);
    std::vector<ErrorRecord> errors = error_report(*model, loaded.corpus, split, partition);

    write_text_file(out / "report.json", eval_report_to_json(report));
    write_text_file(out / "report.txt", eval_report_to_text(report));
    write_text_file(out / "errors.csv", error_report_to_csv(errors));
    write_run_manifest(out, "evaluate", opts, {"report.json", "report.txt", "errors.csv"},
                       corpus_fingerprint(loaded.corpus));
    return json{{"out", out.string()},
                {"evaluated", report.total()},
                {"misclassified", errors.size()},
                {"headline_metric", report.headline_metric_name},
                {"headline_value", report.headline()},
                {"accuracy", report.accuracy},
                {"macro_f1", report.macro_f1},
                {"weighted_f1", report.weighted_f1}};
}

std::vector<std::pair<std::string, TrainConfig>> comparison_configs(const json& opts,
                                                                    const TrainConfig& base) {
    std::vector<std::pair<std::string, TrainConfig>> configs;
    if (opts.contains("preset")) {
        const std::string preset = opts.at("preset").get<std::string>();
        auto add = [&](const std::string& name, ModelKind kind, TextEncoderKind text,
                       BackboneKind image) {
            TrainConfig c = base;
            c.model_kind = kind;
            c.model.text = text == TextEncoderKind::PretrainedTransformer
                               ? pretrained_text_config()
                               : TextEncoderConfig{};
            c.model.image = BackboneSpec::for_kind(image);
            configs.emplace_back(name, c);
        };
        if (preset == "tiny-trio") {
            add("text-only", ModelKind::TextOnly, TextEncoderKind::TinyTest,
                BackboneKind::TinyTest);
            add("image-only", ModelKind::ImageOnly, TextEncoderKind::TinyTest,
                BackboneKind::TinyTest);
            add("fusion", ModelKind::Fusion, TextEncoderKind::TinyTest, BackboneKind::TinyTest);
        } else if (preset == "reference-8") {
            // The eight architectures of the published comparison; requires
            // converted pretrained assets.
            add("text-only", ModelKind::TextOnly, TextEncoderKind::PretrainedTransformer,
                BackboneKind::TinyTest);
            add("image-vgg19", ModelKind::ImageOnly, TextEncoderKind::TinyTest,
                BackboneKind::Vgg19);
            add("image-resnet50", ModelKind::ImageOnly, TextEncoderKind::TinyTest,
                BackboneKind::Resnet50);
            add("image-inception-v3", ModelKind::ImageOnly, TextEncoderKind::TinyTest,
                BackboneKind::InceptionV3);
            add("fusion-vgg19", ModelKind::Fusion, TextEncoderKind::PretrainedTransformer,
                BackboneKind::Vgg19);
            add("fusion-resnet50", ModelKind::Fusion, TextEncoderKind::PretrainedTransformer,
                BackboneKind::Resnet50);
            add("fusion-inception-v3", ModelKind::Fusion, TextEncoderKind::PretrainedTransformer,
                BackboneKind::InceptionV3);
            add("fusion-inception-v4", ModelKind::Fusion, TextEncoderKind::PretrainedTransformer,
                BackboneKind::InceptionV4);
        } else {
            throw ConfigError("unknown preset '" + preset + "' (tiny-trio or reference-8)");
        }
    }
    if (opts.contains("configs")) {
        for (const auto& entry : opts.at("configs")) {
            fs::path file = entry.get<std::string>();
            if (!fs::is_regular_file(file))
                throw ConfigError("config file not found: " + file.string());
            TrainConfig c = train_config_from_json(read_text_file(file));
            c.seed = base.seed;
            configs.emplace_back(file.stem().string(), c);
        }
    }
    if (configs.empty())
        throw ConfigError("compare needs --preset or at least one --config file");
    return configs;
}

json cmd_compare(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    TrainConfig base = train_config_from_options(opts);
    SplitAssignment split = split_for(opts, loaded.corpus, base.seed);
    std::vector<ComparisonRow> rows =
        compare_models(loaded.corpus, split, comparison_configs(opts, base));

    write_text_file(out / "comparison.csv", comparison_to_csv(rows));
    json table = json::array();
    for (const ComparisonRow& row : rows) {
        json r{{"model", row.name},
               {"accuracy", row.report.accuracy},
               {"macro_f1", row.report.macro_f1},
               {"weighted_f1", row.report.weighted_f1},
               {"split_fingerprint", row.split_fingerprint}};
        if (!row.report.reference.empty())
            r["reference_f1_percent"] = row.report.reference.front().second;
        table.push_back(std::move(r));
    }
    write_text_file(out / "comparison.json", json{{"rows", table}}.dump(2) + "\n");
    if (!opts.contains("split")) write_split(split, out / "split.tsv");
    write_run_manifest(out, "compare", opts, {"comparison.csv", "comparison.json"},
                       corpus_fingerprint(loaded.corpus));
    return json{{"out", out.string()}, {"rows", table}};
}

json cmd_generalize(const json& opts) {
    fs::path model_dir = require_dir(opts, "model");
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    auto model = PhaseModel::load(model_dir);
    std::vector<std::string> train_ids = load_training_ids(model_dir);
    const std::string source_tag = opts.value("source_tag", std::string("source-train"));
    const std::string target_tag = opts.value("target_tag", std::string("target"));
    const std::string headline = opts.value("headline_metric", std::string("weighted_f1"));
    EvalReport report =
        generalization_eval(*model, train_ids, source_tag, loaded.corpus, target_tag, headline);
    write_text_file(out / "report.json", eval_report_to_json(report));
    write_text_file(out / "report.txt", eval_report_to_text(report));
    write_run_manifest(out, "generalize", opts, {"report.json", "report.txt"},
                       corpus_fingerprint(loaded.corpus));
    return json{{"out", out.string()},
                {"source", source_tag},
                {"target", target_tag},
                {"evaluated", report.total()},
                {"headline_metric", report.headline_metric_name},
                {"headline_value", report.headline()},
                {"accuracy", report.accuracy},
                {"macro_f1", report.macro_f1},
                {"weighted_f1", report.weighted_f1}};
}

json cmd_lexical(const json& opts) {
    IngestResult loaded = load_corpus(opts, false);
    warn_rejections(loaded);
    fs::path out = out_dir_of(opts);
    if (!opts.contains("lexicons") || !opts.at("lexicons").is_array() ||
        opts.at("lexicons").empty())
        throw ConfigError("lexical needs at least one lexicon file");
    const auto labeled = loaded.corpus.labeled();
    std::vector<std::string> artifacts;
    json summary = json::object();
    for (const auto& entry : opts.at("lexicons")) {
        fs::path file = entry.get<std::string>();
        if (!fs::is_regular_file(file))
            throw ConfigError("lexicon file not found: " + file.string());
        Lexicon lexicon = Lexicon::load(file);
        LexicalProfile profile = per_class_profile(labeled, lexicon);
        const std::string stem = file.stem().string();
        write_text_file(out / (stem + ".csv"), profile_to_csv(profile));
        artifacts.push_back(stem + ".csv");
        json classes = json::object();
        for (const auto& [label, means] : profile.class_means) {
            json per_category = json::object();
            for (std::size_t c = 0; c < profile.categories.size(); ++c)
                per_category[profile.categories[c]] = means[c];
            classes[std::string(phase_slug(label))] = {
                {"documents", profile.class_documents.at(label)},
                {"mean_percent", per_category}};
        }
        summary[stem] = {{"categories", profile.categories},
                         {"classes", classes},
                         {"skipped_documents", profile.skipped_documents}};
    }
    write_text_file(out / "lexical.json", summary.dump(2) + "\n");
    artifacts.push_back("lexical.json");
    write_run_manifest(out, "lexical", opts, artifacts, corpus_fingerprint(loaded.corpus));
    summary["out"] = out.string();
    return summary;
}

json cmd_predict(const json& opts) {
    fs::path model_dir = require_dir(opts, "model");
    auto model = PhaseModel::load(model_dir);
    const std::string text = opts.value("text", std::string());
    const std::string image = opts.value("image", std::string());
    if (model->kind() != ModelKind::ImageOnly && text.empty())
        throw ConfigError("this model needs --text");
    if (model->kind() != ModelKind::TextOnly && image.empty())
        throw ConfigError("this model needs --image");
    auto [label, probs] = model->predict(text, image);
    json probabilities = json::object();
    for (int c = 0; c < kNumClasses; ++c)
        probabilities[std::string(phase_slug(phase_from_index(c)))] = probs(c);
    return json{{"label", std::string(phase_slug(label))},
                {"label_name", std::string(phase_name(label))},
                {"probabilities", probabilities}};
}

}  // namespace

std::vector<std::string> command_names() {
    return {"ingest",  "stats",   "split",      "synth",   "train",  "crossval",
            "evaluate", "compare", "generalize", "lexical", "predict"};
}

std::string run_command(const std::string& command, const std::string& options_json) {
    json opts = parse_options(options_json);
    json result;
    if (command == "ingest") result = cmd_ingest(opts);
    else if (command == "stats") result = cmd_stats(opts);
    else if (command == "split") result = cmd_split(opts);
    else if (command == "synth") result = cmd_synth(opts);
    else if (command == "train") result = cmd_train(opts);
    else if (command == "crossval") result = cmd_crossval(opts);
    else if (command == "evaluate") result = cmd_evaluate(opts);
    else if (command == "compare") result = cmd_compare(opts);
    else if (command == "generalize") result = cmd_generalize(opts);
    else if (command == "lexical") result = cmd_lexical(opts);
    else if (command == "predict") result = cmd_predict(opts);
    else throw ConfigError("unknown command '" + command + "'");
    return result.dump(2) + "\n";
}

}  // namespace mmphase
