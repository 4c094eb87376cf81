/* SPDX-License-Identifier: Apache-2.0
 * Copyright 2026 the mmphase authors
 *
 * C interface to the mmphase multimodal phase-classification pipeline.
 * All functions are thread-safe unless they share a handle; error messages
 * are per-thread via mmp_last_error().
 */

#ifndef MMPHASE_MMPHASE_H
#define MMPHASE_MMPHASE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes mirror the command-line tool's exit codes. */
typedef enum mmp_status {
    MMP_OK = 0,
    MMP_ERR_RUNTIME = 1, /* I/O, data or numeric failure */
    MMP_ERR_CONFIG = 2   /* invalid configuration or usage */
} mmp_status;

/* Library version, e.g. "0.1.0". Static storage. */
const char* mmp_version(void);

/* Message of the most recent failure on the calling thread ("" when none).
 * Valid until the next failing call on the same thread. */
const char* mmp_last_error(void);

/* Frees strings returned through out-parameters below. NULL is a no-op. */
void mmp_string_free(char* s);

/* Runs one workflow command (ingest | stats | split | synth | train |
 * crossval | evaluate | compare | generalize | lexical | predict) with
 * options given as a JSON object — the same schema the CLI flags map onto.
 * On success, when result_json is non-NULL, *result_json receives a JSON
 * summary to release with mmp_string_free(). */
mmp_status mmp_run(const char* command, const char* options_json, char** result_json);

/* --- Trained-model handle ------------------------------------------------ */

typedef struct mmp_model mmp_model;

/* Opens a model directory written by the train/crossval commands. */
mmp_status mmp_model_open(const char* model_dir, mmp_model** out_model);
void mmp_model_free(mmp_model* model);

/* "text-only", "image-only" or "fusion". Owned by the handle. */
const char* mmp_model_kind(const mmp_model* model);

/* Classifies one post. text may be NULL for image-only models and image_path
 * NULL for text-only models. Writes the winning class index (0..4) to
 * *out_class and, when out_probs is non-NULL, the class probabilities in
 * canonical order to out_probs[0..4]. */
mmp_status mmp_model_predict(mmp_model* model, const char* text, const char* image_path,
                             int* out_class, double* out_probs);

/* Canonical class labels; NULL when the index is out of range. */
const char* mmp_class_slug(int class_index);
const char* mmp_class_name(int class_index);

/* --- Corpus handle ------------------------------------------------------- */

typedef struct mmp_corpus mmp_corpus;

/* Reads a line-delimited JSON manifest. image_root NULL means the manifest's
 * directory. Image files are not verified here. */
mmp_status mmp_corpus_open(const char* manifest_path, const char* image_root,
                           mmp_corpus** out_corpus);
void mmp_corpus_free(mmp_corpus* corpus);

size_t mmp_corpus_size(const mmp_corpus* corpus);

/* JSON summary (totals, class counts, fingerprint); mmp_string_free() it. */
mmp_status mmp_corpus_stats(const mmp_corpus* corpus, char** out_json);

/* --- Lexicon handle ------------------------------------------------------ */

typedef struct mmp_lexicon mmp_lexicon;

mmp_status mmp_lexicon_open(const char* path, mmp_lexicon** out_lexicon);
void mmp_lexicon_free(mmp_lexicon* lexicon);

/* JSON object mapping category name to percent of matching tokens. */
mmp_status mmp_lexicon_score(const mmp_lexicon* lexicon, const char* text, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* MMPHASE_MMPHASE_H */
