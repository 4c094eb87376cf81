// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Corpus ingestion and bookkeeping: manifest parsing, duplicate removal,
// class distributions, annotator agreement, and the deterministic
// train/test and k-fold partitions every experiment runs on.

#ifndef MMPHASE_CORPUS_HPP
#define MMPHASE_CORPUS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phase.hpp"

namespace mmphase {

struct MultimodalRecord {
    std::string id;
    std::string text;
    std::string image_path;  // relative to the corpus image root
    std::optional<PhaseLabel> label;
    std::string source;      // corpus tag, e.g. "base-2020", "ukraine-2022"
    std::string created_at;  // ISO-8601 or empty
};

struct Corpus {
    std::filesystem::path image_root;
    std::vector<MultimodalRecord> records;

    std::vector<MultimodalRecord> labeled() const;
    std::size_t unlabeled_count() const;
};

struct Rejection {
    std::size_t line = 0;  // 1-based manifest line
    std::string id;        // may be empty when the line had no id
    std::string reason;
};

struct IngestResult {
    Corpus corpus;
    std::vector<Rejection> rejections;
};

struct CorpusStats {
    std::size_t total = 0;
    std::array<std::size_t, kNumClasses> per_class{};
    std::size_t dropped_duplicates = 0;
    std::size_t dropped_no_image = 0;
    double multimodal_fraction = 1.0;  // retained / (retained + dropped_no_image)
};

struct SplitAssignment {
    // id -> "train" | "test" | "fold-k". Ordered map so exports are stable.
    std::map<std::string, std::string> partition;
    std::uint64_t seed = 0;

    std::vector<std::string> ids_in(std::string_view tag) const;
    std::string fingerprint() const;
};

struct AgreementReport {
    std::size_t items = 0;
    double percent_agreement = 0.0;
    double cohen_kappa = 0.0;
};

// Reads a line-delimited JSON manifest. Records whose image is missing or
// does not decode are quarantined in the rejection log; an unreadable
// manifest file itself is fatal.
IngestResult ingest_manifest(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& image_root);

// Manifest parsing without touching the image files (used where records are
// re-read from an already validated corpus file).
IngestResult read_manifest(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& image_root,
                           bool verify_images);

void write_manifest(const Corpus& corpus, const std::filesystem::path& path);

// Key used for "similar text contents": lowercase, URLs and @-mentions
// stripped, whitespace collapsed.
std::string normalized_text_key(std::string_view text);

struct DedupResult {
    std::vector<MultimodalRecord> records;  // ordered by id
    std::size_t dropped_duplicates = 0;
};

// Keeps one record per id and per normalized-text key; survivor is the
// lexicographically smallest id. Idempotent.
DedupResult deduplicate(const std::vector<MultimodalRecord>& records);

// All records must be labeled; throws naming the first offending id.
CorpusStats class_distribution(const std::vector<MultimodalRecord>& records);

// Train size is floor(train_fraction * N), allocated per class by floor +
// largest remainder. Deterministic in (records, fraction, seed).
SplitAssignment stratified_split(const std::vector<MultimodalRecord>& records,
                                 double train_fraction, std::uint64_t seed);

// k stratified folds with overall fold sizes differing by at most one.
// Element i is the train/test view with fold i+1 held out.
std::vector<SplitAssignment> kfold_split(const std::vector<MultimodalRecord>& records, int k,
                                         std::uint64_t seed);

// Single map id -> "fold-k" derived from the kfold views, for split exports.
SplitAssignment kfold_tags(const std::vector<SplitAssignment>& folds);

void write_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment read_split(const std::filesystem::path& path);

// Both maps must cover the same non-empty id set.
AgreementReport inter_annotator_agreement(const std::map<std::string, PhaseLabel>& ratings_a,
                                          const std::map<std::string, PhaseLabel>& ratings_b);

std::string corpus_fingerprint(const Corpus& corpus);

}  // namespace mmphase

#endif
