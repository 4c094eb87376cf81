// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "mmphase/mmphase.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <utility>

#include "json.hpp"

#include "corpus.hpp"
#include "fusion.hpp"
#include "lexical.hpp"
#include "phase.hpp"
#include "pipeline.hpp"
#include "util.hpp"

using nlohmann::json;

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::runtime_error("out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs the body, translating exceptions into status codes and recording the
// message for mmp_last_error(). The body must not leak handles on throw.
template <typename F>
mmp_status guarded(F&& body) {
    t_last_error.clear();
    try {
        body();
        return MMP_OK;
    } catch (const mmphase::ConfigError& e) {
        t_last_error = e.what();
        return MMP_ERR_CONFIG;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return MMP_ERR_RUNTIME;
    } catch (...) {
        t_last_error = "unknown failure";
        return MMP_ERR_RUNTIME;
    }
}

void require_arg(const void* p, const char* name) {
    if (p == nullptr) throw mmphase::ConfigError(std::string(name) + " must not be NULL");
}

}  // namespace

struct mmp_model {
    std::unique_ptr<mmphase::PhaseModel> impl;
    std::string kind;
};

struct mmp_corpus {
    mmphase::Corpus impl;
};

struct mmp_lexicon {
    mmphase::Lexicon impl;
};

extern "C" {

const char* mmp_version(void) { return mmphase::kToolVersion; }

const char* mmp_last_error(void) { return t_last_error.c_str(); }

void mmp_string_free(char* s) { std::free(s); }

mmp_status mmp_run(const char* command, const char* options_json, char** result_json) {
    return guarded([&] {
        require_arg(command, "command");
        std::string options = options_json != nullptr ? options_json : "{}";
        std::string result = mmphase::run_command(command, options);
        if (result_json != nullptr) *result_json = dup_string(result);
    });
}

mmp_status mmp_model_open(const char* model_dir, mmp_model** out_model) {
    return guarded([&] {
        require_arg(model_dir, "model_dir");
        require_arg(out_model, "out_model");
        auto handle = std::make_unique<mmp_model>();
        handle->impl = mmphase::PhaseModel::load(model_dir);
        handle->kind = mmphase::to_string(handle->impl->kind());
        *out_model = handle.release();
    });
}

void mmp_model_free(mmp_model* model) { delete model; }

const char* mmp_model_kind(const mmp_model* model) {
    return model != nullptr ? model->kind.c_str() : nullptr;
}

mmp_status mmp_model_predict(mmp_model* model, const char* text, const char* image_path,
                             int* out_class, double* out_probs) {
    return guarded([&] {
        require_arg(model, "model");
        require_arg(out_class, "out_class");
        std::string text_in = text != nullptr ? text : "";
        std::string image_in = image_path != nullptr ? image_path : "";
        auto [label, probs] = model->impl->predict(text_in, image_in);
        *out_class = mmphase::phase_index(label);
        if (out_probs != nullptr) {
            for (int i = 0; i < mmphase::kNumClasses; ++i) out_probs[i] = probs(i);
        }
    });
}

const char* mmp_class_slug(int class_index) {
    if (class_index < 0 || class_index >= mmphase::kNumClasses) return nullptr;
    return mmphase::phase_slug(mmphase::phase_from_index(class_index)).data();
}

const char* mmp_class_name(int class_index) {
    if (class_index < 0 || class_index >= mmphase::kNumClasses) return nullptr;
    return mmphase::phase_name(mmphase::phase_from_index(class_index)).data();
}

mmp_status mmp_corpus_open(const char* manifest_path, const char* image_root,
                           mmp_corpus** out_corpus) {
    return guarded([&] {
        require_arg(manifest_path, "manifest_path");
        require_arg(out_corpus, "out_corpus");
        std::filesystem::path manifest(manifest_path);
        std::filesystem::path root =
            image_root != nullptr ? std::filesystem::path(image_root) : manifest.parent_path();
        auto handle = std::make_unique<mmp_corpus>();
        handle->impl = mmphase::read_manifest(manifest, root, /*verify_images=*/false).corpus;
        *out_corpus = handle.release();
    });
}

void mmp_corpus_free(mmp_corpus* corpus) { delete corpus; }

size_t mmp_corpus_size(const mmp_corpus* corpus) {
    return corpus != nullptr ? corpus->impl.records.size() : 0;
}

mmp_status mmp_corpus_stats(const mmp_corpus* corpus, char** out_json) {
    return guarded([&] {
        require_arg(corpus, "corpus");
        require_arg(out_json, "out_json");
        const auto labeled = corpus->impl.labeled();
        json per_class = json::object();
        if (!labeled.empty()) {
            auto stats = mmphase::class_distribution(labeled);
            for (int i = 0; i < mmphase::kNumClasses; ++i) {
                auto label = mmphase::phase_from_index(i);
                per_class[std::string(mmphase::phase_slug(label))] = stats.per_class[i];
            }
        }
        json out = {
            {"total", corpus->impl.records.size()},
            {"labeled", labeled.size()},
            {"unlabeled", corpus->impl.unlabeled_count()},
            {"per_class", per_class},
            {"fingerprint", mmphase::corpus_fingerprint(corpus->impl)},
        };
        *out_json = dup_string(out.dump(2));
    });
}

mmp_status mmp_lexicon_open(const char* path, mmp_lexicon** out_lexicon) {
    return guarded([&] {
        require_arg(path, "path");
        require_arg(out_lexicon, "out_lexicon");
        auto handle = std::make_unique<mmp_lexicon>();
        handle->impl = mmphase::Lexicon::load(path);
        *out_lexicon = handle.release();
    });
}

void mmp_lexicon_free(mmp_lexicon* lexicon) { delete lexicon; }

mmp_status mmp_lexicon_score(const mmp_lexicon* lexicon, const char* text, char** out_json) {
    return guarded([&] {
        require_arg(lexicon, "lexicon");
        require_arg(text, "text");
        require_arg(out_json, "out_json");
        json out = json::object();
        for (const auto& [category, percent] : mmphase::score_text(text, lexicon->impl)) {
            out[category] = percent;
        }
        *out_json = dup_string(out.dump(2));
    });
}

}  // extern "C"
