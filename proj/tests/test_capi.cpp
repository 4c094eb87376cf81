// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Exercises the C interface the way an embedding application would: only the
// public header, opaque handles and status codes.

#include "mmphase/mmphase.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "testutil.hpp"

using json = nlohmann::json;
using mmptest::TempDir;
namespace fs = std::filesystem;

namespace {

// Builds one synthetic corpus and one trained fusion model through mmp_run.
struct CapiFixture {
    TempDir dir;
    fs::path synth_dir{dir / "synth"};
    fs::path train_dir{dir / "train"};
    fs::path manifest{synth_dir / "manifest.jsonl"};
    fs::path model_dir{train_dir / "model"};

    CapiFixture() {
        const json synth_opts{
            {"out", synth_dir.string()}, {"n", 50}, {"seed", 6}, {"image_size", 32}};
        REQUIRE(mmp_run("synth", synth_opts.dump().c_str(), nullptr) == MMP_OK);
        const json train_opts{{"corpus", manifest.string()},  {"out", train_dir.string()},
                              {"model_kind", "fusion"},       {"text_encoder", "tiny-test"},
                              {"backbone", "tiny-test"},      {"max_epochs", 1},
                              {"batch_size", 8},              {"learning_rate", 0.05},
                              {"seed", 6}};
        char* result = nullptr;
        REQUIRE(mmp_run("train", train_opts.dump().c_str(), &result) == MMP_OK);
        REQUIRE(result != nullptr);
        mmp_string_free(result);
    }

    static CapiFixture& instance() {
        static CapiFixture fixture;
        return fixture;
    }
};

const fs::path kRepoData = fs::path(__FILE__).parent_path() / "../data";

}  // namespace

TEST_CASE("version and class tables have static storage") {
    REQUIRE(mmp_version() != nullptr);
    CHECK(std::string(mmp_version()) == "0.1.0");

    REQUIRE(mmp_class_slug(0) != nullptr);
    CHECK(std::string(mmp_class_slug(0)) == "arrival");
    CHECK(std::string(mmp_class_slug(4)) == "infographics");
    CHECK(std::string(mmp_class_name(0)) == "Arrival of Refugees");
    CHECK(std::string(mmp_class_name(1)) == "Temporal stay at Asylums");
    CHECK(mmp_class_slug(-1) == nullptr);
    CHECK(mmp_class_slug(5) == nullptr);
    CHECK(mmp_class_name(-1) == nullptr);
    CHECK(mmp_class_name(5) == nullptr);

    mmp_string_free(nullptr);  // documented no-op
}

TEST_CASE("mmp_run maps usage problems to MMP_ERR_CONFIG") {
    CHECK(mmp_run(nullptr, "{}", nullptr) == MMP_ERR_CONFIG);
    CHECK(std::string(mmp_last_error()).find("command") != std::string::npos);

    CHECK(mmp_run("bogus", "{}", nullptr) == MMP_ERR_CONFIG);
    CHECK(std::string(mmp_last_error()).find("unknown command 'bogus'") != std::string::npos);

    CHECK(mmp_run("stats", "{broken", nullptr) == MMP_ERR_CONFIG);
    CHECK(std::string(mmp_last_error()).find("not valid JSON") != std::string::npos);

    // NULL options default to an empty object, so the command's own
    // validation answers.
    CHECK(mmp_run("stats", nullptr, nullptr) == MMP_ERR_CONFIG);
    CHECK(std::string(mmp_last_error()).find("missing required option 'corpus'") !=
          std::string::npos);
}

TEST_CASE("mmp_run maps runtime failures to MMP_ERR_RUNTIME") {
    TempDir dir;
    fs::create_directories(dir / "empty-model");
    const json opts{{"model", (dir / "empty-model").string()}, {"text", "x"}, {"image", "y"}};
    CHECK(mmp_run("predict", opts.dump().c_str(), nullptr) == MMP_ERR_RUNTIME);
    CHECK(std::string(mmp_last_error()).find("not a model directory") != std::string::npos);
}

TEST_CASE("a successful call clears the per-thread error") {
    CHECK(mmp_run("bogus", "{}", nullptr) == MMP_ERR_CONFIG);
    CHECK(std::string(mmp_last_error()) != "");
    CHECK(mmp_version() != nullptr);  // non-failing accessors leave it alone
    CHECK(std::string(mmp_last_error()) != "");
    TempDir dir;
    const json opts{{"out", (dir / "s").string()}, {"n", 50}, {"seed", 1}, {"image_size", 16}};
    CHECK(mmp_run("synth", opts.dump().c_str(), nullptr) == MMP_OK);
    CHECK(std::string(mmp_last_error()) == "");
}

TEST_CASE("mmp_run returns the command's JSON summary") {
    TempDir dir;
    const json opts{{"out", (dir / "s").string()}, {"n", 55}, {"seed", 2}, {"image_size", 16}};
    char* result = nullptr;
    REQUIRE(mmp_run("synth", opts.dump().c_str(), &result) == MMP_OK);
    REQUIRE(result != nullptr);
    json parsed = json::parse(result);
    mmp_string_free(result);
    CHECK(parsed.at("records") == 55);
    CHECK(parsed.at("per_class").at("arrival") == 11);
}

TEST_CASE("model handles load, describe and classify") {
    CapiFixture& fx = CapiFixture::instance();

    mmp_model* model = nullptr;
    REQUIRE(mmp_model_open(fx.model_dir.string().c_str(), &model) == MMP_OK);
    REQUIRE(model != nullptr);
    CHECK(std::string(mmp_model_kind(model)) == "fusion");
    CHECK(mmp_model_kind(nullptr) == nullptr);

    const fs::path image = fx.synth_dir / "images/synth-6-000000.png";
    REQUIRE(fs::is_regular_file(image));
    int cls = -1;
    double probs[5] = {0, 0, 0, 0, 0};
    REQUIRE(mmp_model_predict(model, "harbor at the gate", image.string().c_str(), &cls,
                              probs) == MMP_OK);
    CHECK(cls >= 0);
    CHECK(cls < 5);
    double sum = 0.0;
    for (double p : probs) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // out_probs is optional; out_class is not.
    int cls2 = -1;
    CHECK(mmp_model_predict(model, "harbor at the gate", image.string().c_str(), &cls2,
                            nullptr) == MMP_OK);
    CHECK(cls2 == cls);
    CHECK(mmp_model_predict(model, "x", image.string().c_str(), nullptr, nullptr) ==
          MMP_ERR_CONFIG);
    CHECK(mmp_model_predict(nullptr, "x", "y", &cls, nullptr) == MMP_ERR_CONFIG);
    mmp_model_free(model);
    mmp_model_free(nullptr);

    mmp_model* missing = nullptr;
    TempDir dir;
    fs::create_directories(dir / "nothing");
    CHECK(mmp_model_open((dir / "nothing").string().c_str(), &missing) == MMP_ERR_RUNTIME);
    CHECK(std::string(mmp_last_error()).find("not a model directory") != std::string::npos);
}

TEST_CASE("corpus handles expose size and stats") {
    CapiFixture& fx = CapiFixture::instance();

    mmp_corpus* corpus = nullptr;
    REQUIRE(mmp_corpus_open(fx.manifest.string().c_str(), nullptr, &corpus) == MMP_OK);
    REQUIRE(corpus != nullptr);
    CHECK(mmp_corpus_size(corpus) == 50);
    CHECK(mmp_corpus_size(nullptr) == 0);

    char* stats_json = nullptr;
    REQUIRE(mmp_corpus_stats(corpus, &stats_json) == MMP_OK);
    REQUIRE(stats_json != nullptr);
    json stats = json::parse(stats_json);
    mmp_string_free(stats_json);
    CHECK(stats.at("total") == 50);
    CHECK(stats.at("labeled") == 50);
    CHECK(stats.at("unlabeled") == 0);
    CHECK(stats.at("per_class").at("asylum") == 10);
    CHECK(!stats.at("fingerprint").get<std::string>().empty());
    CHECK(mmp_corpus_stats(corpus, nullptr) == MMP_ERR_CONFIG);
    mmp_corpus_free(corpus);
    mmp_corpus_free(nullptr);

    mmp_corpus* missing = nullptr;
    CHECK(mmp_corpus_open("/no/such/manifest.jsonl", nullptr, &missing) == MMP_ERR_RUNTIME);
    CHECK(std::string(mmp_last_error()).find("cannot open manifest") != std::string::npos);
}

TEST_CASE("lexicon handles score text through the C boundary") {
    const fs::path lexicon_path = kRepoData / "lexicons/gender.lex";
    REQUIRE(fs::is_regular_file(lexicon_path));

    mmp_lexicon* lexicon = nullptr;
    REQUIRE(mmp_lexicon_open(lexicon_path.string().c_str(), &lexicon) == MMP_OK);
    REQUIRE(lexicon != nullptr);

    char* scores_json = nullptr;
    REQUIRE(mmp_lexicon_score(lexicon, "he helps her and his cat", &scores_json) == MMP_OK);
    REQUIRE(scores_json != nullptr);
    json scores = json::parse(scores_json);
    mmp_string_free(scores_json);
    CHECK(scores.at("male").get<double>() == doctest::Approx(100.0 * 2 / 6).epsilon(1e-9));
    CHECK(scores.at("female").get<double>() == doctest::Approx(100.0 * 1 / 6).epsilon(1e-9));

    CHECK(mmp_lexicon_score(lexicon, "?!", &scores_json) == MMP_ERR_RUNTIME);
    CHECK(std::string(mmp_last_error()).find("no tokens") != std::string::npos);
    CHECK(mmp_lexicon_score(lexicon, nullptr, &scores_json) == MMP_ERR_CONFIG);
    mmp_lexicon_free(lexicon);
    mmp_lexicon_free(nullptr);

    mmp_lexicon* missing = nullptr;
    CHECK(mmp_lexicon_open("/no/such.lex", &missing) == MMP_ERR_RUNTIME);
    CHECK(std::string(mmp_last_error()).find("no/such.lex") != std::string::npos);
}
