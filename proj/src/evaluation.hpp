// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Classification metrics, confusion matrices, misclassification reports and
// the cross-corpus generalization protocol with its leakage guard.

#ifndef MMPHASE_EVALUATION_HPP
#define MMPHASE_EVALUATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "fusion.hpp"
#include "phase.hpp"

namespace mmphase {

using Confusion = std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>;

// Rows = true label, columns = predicted, canonical class order.
Confusion confusion_matrix(const std::vector<std::pair<PhaseLabel, PhaseLabel>>& pairs);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::array<ClassMetrics, kNumClasses> per_class{};
    Confusion confusion{};
    std::string headline_metric_name = "weighted_f1";
    int zero_division_warnings = 0;
    // Domain-shift banner; empty outside the generalization protocol.
    std::string source_tag;
    std::string target_tag;
    // Published reference values for context; informational only, never
    // compared against.
    std::vector<std::pair<std::string, double>> reference;

    std::int64_t total() const;
    double headline() const;
};

// Per-class precision/recall/F1 with the zero-division-is-zero convention,
// macro average over classes with support, weighted average by support,
// accuracy = trace/total. All-zero confusion → "empty evaluation".
EvalReport metrics_from_confusion(const Confusion& confusion,
                                  const std::string& headline = "weighted_f1");

EvalReport evaluate_model(PhaseModel& model, const Corpus& corpus, const SplitAssignment& split,
                          const std::string& partition_tag,
                          const std::string& headline = "weighted_f1");

struct ErrorRecord {
    std::string id;
    std::string text;
    std::string image_path;
    PhaseLabel true_label = PhaseLabel::Arrival;
    PhaseLabel predicted_label = PhaseLabel::Arrival;
    std::array<double, kNumClasses> probabilities{};
};

// Misclassified records in the given partition, sorted by descending
// confidence of the wrong prediction.
std::vector<ErrorRecord> error_report(PhaseModel& model, const Corpus& corpus,
                                      const SplitAssignment& split,
                                      const std::string& partition_tag);

// Evaluates a model on a later, unseen corpus. Any overlap between the
// model's training ids and the target corpus is an error (leakage guard).
EvalReport generalization_eval(PhaseModel& model, const std::vector<std::string>& train_ids,
                               const std::string& source_tag, const Corpus& target,
                               const std::string& target_tag,
                               const std::string& headline = "weighted_f1");

// F1 reported for the matching architecture on the original annotated corpus
// (context annotation; that corpus is not distributable).
std::optional<double> reference_f1(ModelKind kind, TextEncoderKind text, BackboneKind image);
// Same, for the crisis-transfer protocol.
std::optional<double> generalization_reference_f1(ModelKind kind, TextEncoderKind text,
                                                  BackboneKind image);

std::string eval_report_to_json(const EvalReport& report);
std::string eval_report_to_text(const EvalReport& report);
std::string error_report_to_csv(const std::vector<ErrorRecord>& records);

}  // namespace mmphase

#endif
