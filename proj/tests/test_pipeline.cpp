// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "corpus.hpp"
#include "image_io.hpp"
#include "synth.hpp"
#include "testutil.hpp"
#include "util.hpp"

using namespace mmphase;
using mmptest::TempDir;
using mmptest::read_file;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json run_json(const std::string& command, const json& options) {
    return json::parse(run_command(command, options.dump()));
}

// Per-pixel jitter is added to all three channels at once, so the red/blue
// channel-mean difference is exactly +160 (warm), -160 (cool) or 0 (gray grid).
double red_blue_gap(const RasterImage& img) {
    double sum_r = 0.0, sum_b = 0.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            sum_r += img.at(y, x, 0);
            sum_b += img.at(y, x, 2);
        }
    }
    const double pixels = static_cast<double>(img.height) * img.width;
    return (sum_r - sum_b) / pixels;
}

bool all_digit_tokens(const std::string& text) {
    const std::vector<std::string> tokens = word_tokens(text);
    if (tokens.empty()) return false;
    for (const std::string& token : tokens)
        if (!std::all_of(token.begin(), token.end(),
                         [](unsigned char ch) { return std::isdigit(ch); }))
            return false;
    return true;
}

const fs::path kRepoData = fs::path(__FILE__).parent_path() / "../data";

// One synthetic corpus plus one trained fusion model, built once and shared by
// the command-flow tests below.
struct PipelineFixture {
    TempDir dir;
    fs::path synth_dir{dir / "synth"};
    fs::path split_dir{dir / "split"};
    fs::path train_dir{dir / "train"};
    fs::path manifest{synth_dir / "manifest.jsonl"};
    fs::path split_file{split_dir / "split.tsv"};
    fs::path model_dir{train_dir / "model"};
    json synth_result, split_result, train_result;
    json train_opts;

    PipelineFixture() {
        synth_result = run_json(
            "synth", {{"out", synth_dir.string()}, {"n", 60}, {"seed", 3}, {"image_size", 32}});
        split_result = run_json("split", {{"corpus", manifest.string()},
                                          {"out", split_dir.string()},
                                          {"train_fraction", 0.75},
                                          {"seed", 9}});
        train_opts = {{"corpus", manifest.string()}, {"split", split_file.string()},
                      {"out", train_dir.string()},  {"model_kind", "fusion"},
                      {"text_encoder", "tiny-test"}, {"backbone", "tiny-test"},
                      {"max_epochs", 2},            {"batch_size", 8},
                      {"learning_rate", 0.05},      {"seed", 5}};
        train_result = run_json("train", train_opts);
    }

    static PipelineFixture& instance() {
        static PipelineFixture fixture;
        return fixture;
    }
};

}  // namespace

TEST_CASE("synthetic corpus is deterministic byte for byte") {
    TempDir dir;
    SynthConfig config;
    config.n = 50;
    config.seed = 21;
    config.image_size = 16;
    config.out_dir = dir / "a";
    SynthResult a = generate_synthetic_corpus(config);
    config.out_dir = dir / "b";
    SynthResult b = generate_synthetic_corpus(config);

    const std::string manifest_a = read_file(a.manifest_path);
    CHECK(manifest_a == read_file(b.manifest_path));
    CHECK(!manifest_a.empty());
    IngestResult loaded = read_manifest(a.manifest_path, a.image_root, true);
    REQUIRE(loaded.rejections.empty());
    REQUIRE(loaded.corpus.records.size() == 50);
    for (const MultimodalRecord& r : loaded.corpus.records)
        CHECK(read_file(dir / "a" / r.image_path) == read_file(dir / "b" / r.image_path));
}

TEST_CASE("synthetic corpus rejects degenerate configurations") {
    TempDir dir;
    SynthConfig config;
    config.out_dir = dir / "out";
    config.n = 49;
    CHECK_THROWS_WITH_AS(generate_synthetic_corpus(config), doctest::Contains("n >= 50"),
                         ConfigError);
    config.n = 50;
    config.image_size = 8;
    CHECK_THROWS_WITH_AS(generate_synthetic_corpus(config), doctest::Contains("image_size"),
                         ConfigError);
}

TEST_CASE("synthetic classes stay within one record of each other") {
    TempDir dir;
    SynthConfig config;
    config.n = 52;
    config.out_dir = dir / "out";
    SynthResult result = generate_synthetic_corpus(config);
    CHECK(result.per_class == std::array<std::size_t, 5>{11, 11, 10, 10, 10});
    CHECK(result.records == 52);
}

TEST_CASE("synthetic labels decode from the two modality bits") {
    TempDir dir;
    SynthConfig config;
    config.n = 50;
    config.seed = 11;
    config.image_size = 16;
    config.out_dir = dir / "out";
    SynthResult result = generate_synthetic_corpus(config);
    IngestResult loaded = read_manifest(result.manifest_path, result.image_root, false);
    REQUIRE(loaded.corpus.records.size() == 50);

    for (const MultimodalRecord& record : loaded.corpus.records) {
        CAPTURE(record.id);
        CHECK(record.id.rfind("synth-11-", 0) == 0);
        REQUIRE(record.label.has_value());
        const bool has_a = record.text.find(kSynthKeywordA) != std::string::npos;
        const bool has_b = record.text.find(kSynthKeywordB) != std::string::npos;
        CHECK(!(has_a && has_b));
        const double gap = red_blue_gap(decode_image(result.image_root / record.image_path));
        if (!has_a && !has_b) {
            // Chart class: numeric text over a neutral gray grid.
            CHECK(*record.label == PhaseLabel::Infographics);
            CHECK(all_digit_tokens(record.text));
            CHECK(gap == 0.0);
        } else {
            const int text_bit = has_b ? 1 : 0;
            REQUIRE((gap == 160.0 || gap == -160.0));
            const int image_bit = gap > 0 ? 0 : 1;
            CHECK(phase_index(*record.label) == 2 * image_bit + text_bit);
        }
    }
}

TEST_CASE("run_command rejects malformed invocations") {
    CHECK_THROWS_WITH_AS(run_command("bogus", "{}"), doctest::Contains("unknown command 'bogus'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(run_command("stats", "{not json"),
                         doctest::Contains("not valid JSON"), ConfigError);
    CHECK_THROWS_WITH_AS(run_command("stats", "[1, 2]"),
                         doctest::Contains("must be a JSON object"), ConfigError);
    CHECK_THROWS_WITH_AS(run_command("stats", "{}"),
                         doctest::Contains("missing required option 'corpus'"), ConfigError);
    CHECK_THROWS_WITH_AS(run_command("stats", R"({"corpus": "/no/such/file.jsonl"})"),
                         doctest::Contains("is not a file"), ConfigError);

    const auto names = command_names();
    CHECK(names.size() == 11);
    CHECK(std::find(names.begin(), names.end(), "train") != names.end());
    CHECK(std::find(names.begin(), names.end(), "lexical") != names.end());
}

TEST_CASE("synth command reports and records its outputs") {
    PipelineFixture& fx = PipelineFixture::instance();
    CHECK(fx.synth_result.at("records") == 60);
    for (const char* slug : {"arrival", "asylum", "rehabilitation", "integration", "infographics"})
        CHECK(fx.synth_result.at("per_class").at(slug) == 12);
    CHECK(fs::is_regular_file(fx.manifest));
    CHECK(fs::is_directory(fx.synth_dir / "images"));

    json run = json::parse(read_file(fx.synth_dir / "run.json"));
    CHECK(run.at("command") == "synth");
    CHECK(run.at("tool_version") == "0.1.0");
    CHECK(run.at("seed") == 3);
    CHECK(run.at("options").at("n") == 60);
    const auto& artifacts = run.at("artifacts");
    CHECK(std::find(artifacts.begin(), artifacts.end(), "manifest.jsonl") != artifacts.end());
    CHECK(!run.at("corpus_fingerprint").get<std::string>().empty());
}

TEST_CASE("stats command summarizes a manifest") {
    PipelineFixture& fx = PipelineFixture::instance();
    json result = run_json("stats", {{"corpus", fx.manifest.string()}});
    CHECK(result.at("total") == 60);
    CHECK(result.at("labeled") == 60);
    CHECK(result.at("unlabeled") == 0);
    CHECK(result.at("per_class").at("asylum") == 12);
    CHECK(!result.at("fingerprint").get<std::string>().empty());
}

TEST_CASE("split command stratifies and stores the assignment") {
    PipelineFixture& fx = PipelineFixture::instance();
    CHECK(fx.split_result.at("mode") == "holdout");
    CHECK(fx.split_result.at("partitions").at("train") == 45);
    CHECK(fx.split_result.at("partitions").at("test") == 15);
    CHECK(!fx.split_result.at("fingerprint").get<std::string>().empty());
    REQUIRE(fs::is_regular_file(fx.split_file));
    SplitAssignment split = read_split(fx.split_file);
    CHECK(split.ids_in("train").size() == 45);
    CHECK(split.ids_in("test").size() == 15);

    TempDir out;
    json kfold = run_json("split", {{"corpus", fx.manifest.string()},
                                    {"out", (out / "k").string()},
                                    {"mode", "kfold"},
                                    {"folds", 3}});
    CHECK(kfold.at("partitions").at("fold-1") == 20);
    CHECK(kfold.at("partitions").at("fold-2") == 20);
    CHECK(kfold.at("partitions").at("fold-3") == 20);
    CHECK_THROWS_WITH_AS(run_json("split", {{"corpus", fx.manifest.string()},
                                            {"out", (out / "m").string()},
                                            {"mode", "random"}}),
                         doctest::Contains("unknown split mode 'random'"), ConfigError);
}

TEST_CASE("train command writes the model directory and logs") {
    PipelineFixture& fx = PipelineFixture::instance();
    CHECK(fx.train_result.at("epochs") == 2);
    CHECK(fx.train_result.at("trained_records") == 45);
    CHECK(fx.train_result.contains("accuracy"));
    CHECK(fx.train_result.contains("headline_value"));
    CHECK(fx.train_result.at("headline_metric") == "weighted_f1");

    CHECK(fs::is_regular_file(fx.model_dir / "config.json"));
    CHECK(fs::is_regular_file(fx.model_dir / "weights.mmpw"));
    CHECK(fs::is_regular_file(fx.model_dir / "training_ids.txt"));
    CHECK(fs::is_regular_file(fx.train_dir / "history.csv"));
    CHECK(fs::is_regular_file(fx.train_dir / "train_config.json"));
    CHECK(fs::is_regular_file(fx.train_dir / "report.json"));
    CHECK(fs::is_regular_file(fx.train_dir / "run.json"));

    const std::string history = read_file(fx.train_dir / "history.csv");
    CHECK(history.rfind("epoch,train_loss,val_loss,metric,lr\n", 0) == 0);
    CHECK(std::count(history.begin(), history.end(), '\n') == 3);

    // training_ids.txt holds exactly the train partition, one id per line.
    const std::string ids = read_file(fx.model_dir / "training_ids.txt");
    CHECK(std::count(ids.begin(), ids.end(), '\n') == 45);
    CHECK(ids.find("synth-3-") != std::string::npos);
}

TEST_CASE("train command is reproducible byte for byte") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    json opts = fx.train_opts;
    opts["out"] = (out / "again").string();
    json result = run_json("train", opts);
    CHECK(result.at("accuracy") == fx.train_result.at("accuracy"));
    CHECK(read_file(out / "again/history.csv") == read_file(fx.train_dir / "history.csv"));
    CHECK(read_file(out / "again/model/weights.mmpw") ==
          read_file(fx.model_dir / "weights.mmpw"));
    CHECK(read_file(out / "again/model/config.json") ==
          read_file(fx.model_dir / "config.json"));
}

TEST_CASE("evaluate command reports the held-out partition") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    json result = run_json("evaluate", {{"corpus", fx.manifest.string()},
                                        {"model", fx.model_dir.string()},
                                        {"split", fx.split_file.string()},
                                        {"out", (out / "eval").string()}});
    CHECK(result.at("evaluated") == 15);
    CHECK(result.at("headline_metric") == "weighted_f1");
    CHECK(result.at("accuracy").get<double>() >= 0.0);
    CHECK(result.at("misclassified").get<std::size_t>() <= 15);
    CHECK(fs::is_regular_file(out / "eval/report.json"));
    CHECK(fs::is_regular_file(out / "eval/report.txt"));
    const std::string errors = read_file(out / "eval/errors.csv");
    CHECK(errors.rfind("id,", 0) == 0);
    json report = json::parse(read_file(out / "eval/report.json"));
    CHECK(report.at("confusion").size() == 5);
}

TEST_CASE("predict command asks for the modalities the model uses") {
    PipelineFixture& fx = PipelineFixture::instance();
    const fs::path image = fx.synth_dir / "images/synth-3-000000.png";
    REQUIRE(fs::is_regular_file(image));

    json result = run_json("predict", {{"model", fx.model_dir.string()},
                                       {"text", "harbor crossing at the station"},
                                       {"image", image.string()}});
    const std::string label = result.at("label").get<std::string>();
    const std::vector<std::string> slugs{"arrival", "asylum", "rehabilitation", "integration",
                                         "infographics"};
    CHECK(std::find(slugs.begin(), slugs.end(), label) != slugs.end());
    CHECK(!result.at("label_name").get<std::string>().empty());
    double sum = 0.0;
    for (const std::string& slug : slugs) sum += result.at("probabilities").at(slug).get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_WITH_AS(
        run_json("predict", {{"model", fx.model_dir.string()}, {"image", image.string()}}),
        doctest::Contains("needs --text"), ConfigError);
    CHECK_THROWS_WITH_AS(
        run_json("predict", {{"model", fx.model_dir.string()}, {"text", "harbor"}}),
        doctest::Contains("needs --image"), ConfigError);
}

TEST_CASE("lexical command profiles the corpus per lexicon") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    const fs::path lexicon = kRepoData / "lexicons/gender.lex";
    REQUIRE(fs::is_regular_file(lexicon));
    json result = run_json("lexical", {{"corpus", fx.manifest.string()},
                                       {"lexicons", json::array({lexicon.string()})},
                                       {"out", (out / "lex").string()}});
    REQUIRE(result.contains("gender"));
    CHECK(result.at("gender").at("categories") == json::array({"male", "female"}));
    CHECK(result.at("gender").at("classes").contains("arrival"));
    const std::string csv = read_file(out / "lex/gender.csv");
    CHECK(csv.rfind("class,documents,male,female\n", 0) == 0);
    CHECK(fs::is_regular_file(out / "lex/lexical.json"));

    CHECK_THROWS_WITH_AS(run_json("lexical", {{"corpus", fx.manifest.string()},
                                              {"out", (out / "none").string()}}),
                         doctest::Contains("at least one lexicon"), ConfigError);
    CHECK_THROWS_WITH_AS(
        run_json("lexical", {{"corpus", fx.manifest.string()},
                             {"out", (out / "miss").string()},
                             {"lexicons", json::array({(out / "nope.lex").string()})}}),
        doctest::Contains("lexicon file not found"), ConfigError);
}

TEST_CASE("generalize command scores a disjoint target corpus") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    json target = run_json("synth", {{"out", (out / "target").string()},
                                     {"n", 50},
                                     {"seed", 4},
                                     {"image_size", 32}});
    (void)target;
    json result = run_json("generalize",
                           {{"corpus", (out / "target/manifest.jsonl").string()},
                            {"model", fx.model_dir.string()},
                            {"out", (out / "gen").string()}});
    CHECK(result.at("evaluated") == 50);
    CHECK(result.at("source") == "source-train");
    CHECK(result.at("target") == "target");
    const std::string report = read_file(out / "gen/report.txt");
    CHECK(report.find("domain shift: source-train -> target") != std::string::npos);
}

TEST_CASE("crossval command trains one model per fold") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    json result = run_json("crossval", {{"corpus", fx.manifest.string()},
                                        {"out", (out / "cv").string()},
                                        {"model_kind", "fusion"},
                                        {"text_encoder", "tiny-test"},
                                        {"backbone", "tiny-test"},
                                        {"folds", 2},
                                        {"max_epochs", 1},
                                        {"batch_size", 8},
                                        {"seed", 5}});
    REQUIRE(result.at("folds").size() == 2);
    CHECK(result.at("folds").at(0).at("fold") == 1);
    CHECK(result.at("summary").at("macro_f1").contains("mean"));
    CHECK(result.at("summary").at("macro_f1").contains("stddev"));
    CHECK(fs::is_regular_file(out / "cv/summary.json"));
    CHECK(fs::is_regular_file(out / "cv/fold-1/model/config.json"));
    CHECK(fs::is_regular_file(out / "cv/fold-2/report.txt"));
}

TEST_CASE("compare command ranks the preset architectures on one split") {
    PipelineFixture& fx = PipelineFixture::instance();
    TempDir out;
    json result = run_json("compare", {{"corpus", fx.manifest.string()},
                                       {"out", (out / "cmp").string()},
                                       {"preset", "tiny-trio"},
                                       {"max_epochs", 1},
                                       {"batch_size", 8},
                                       {"seed", 5}});
    REQUIRE(result.at("rows").size() == 3);
    std::vector<std::string> names;
    for (const auto& row : result.at("rows")) names.push_back(row.at("model"));
    CHECK(names == std::vector<std::string>{"text-only", "image-only", "fusion"});
    const std::string fp = result.at("rows").at(0).at("split_fingerprint");
    for (const auto& row : result.at("rows")) CHECK(row.at("split_fingerprint") == fp);

    const std::string csv = read_file(out / "cmp/comparison.csv");
    CHECK(csv.rfind("model,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(fs::is_regular_file(out / "cmp/comparison.json"));
    CHECK(fs::is_regular_file(out / "cmp/split.tsv"));

    CHECK_THROWS_WITH_AS(run_json("compare", {{"corpus", fx.manifest.string()},
                                              {"out", (out / "bad").string()},
                                              {"preset", "everything"}}),
                         doctest::Contains("unknown preset"), ConfigError);
}
