// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "util.hpp"

namespace mmphase {

using nlohmann::json;

Confusion confusion_matrix(const std::vector<std::pair<PhaseLabel, PhaseLabel>>& pairs) {
    Confusion m{};
    for (const auto& [truth, predicted] : pairs)
        ++m[static_cast<std::size_t>(phase_index(truth))]
          [static_cast<std::size_t>(phase_index(predicted))];
    return m;
}

std::int64_t EvalReport::total() const {
    std::int64_t n = 0;
    for (const auto& row : confusion)
        for (std::int64_t v : row) n += v;
    return n;
}

double EvalReport::headline() const {
    if (headline_metric_name == "accuracy") return accuracy;
    if (headline_metric_name == "macro_f1") return macro_f1;
    if (headline_metric_name == "weighted_f1") return weighted_f1;
    throw ConfigError("unknown headline metric '" + headline_metric_name +
                      "' (accuracy, macro_f1 or weighted_f1)");
}

EvalReport metrics_from_confusion(const Confusion& confusion, const std::string& headline) {
    EvalReport report;
    report.confusion = confusion;
    report.headline_metric_name = headline;

    std::int64_t total = 0, trace = 0;
    std::array<std::int64_t, kNumClasses> row_sum{}, col_sum{};
    for (std::size_t r = 0; r < kNumClasses; ++r) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const std::int64_t v = confusion[r][c];
            if (v < 0) throw std::runtime_error("negative confusion count");
            total += v;
            row_sum[r] += v;
            col_sum[c] += v;
            if (r == c) trace += v;
        }
    }
    if (total == 0) throw std::runtime_error("empty evaluation");

    double macro_sum = 0.0, weighted_sum = 0.0;
    std::int64_t supported_classes = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        ClassMetrics& m = report.per_class[c];
        const double tp = static_cast<double>(confusion[c][c]);
        m.support = row_sum[c];
        if (col_sum[c] > 0) {
            m.precision = tp / static_cast<double>(col_sum[c]);
        } else {
            ++report.zero_division_warnings;
        }
        if (row_sum[c] > 0) {
            m.recall = tp / static_cast<double>(row_sum[c]);
        } else {
            ++report.zero_division_warnings;
        }
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            ++report.zero_division_warnings;
        }
        if (m.support > 0) {
            macro_sum += m.f1;
            ++supported_classes;
            weighted_sum += static_cast<double>(m.support) * m.f1;
        }
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    report.macro_f1 = supported_classes > 0 ? macro_sum / static_cast<double>(supported_classes)
                                            : 0.0;
    report.weighted_f1 = weighted_sum / static_cast<double>(total);
    report.headline();  // validates the metric name
    return report;
}

namespace {

std::map<std::string, const MultimodalRecord*> record_index(const Corpus& corpus) {
    std::map<std::string, const MultimodalRecord*> index;
    for (const MultimodalRecord& r : corpus.records) index.emplace(r.id, &r);
    return index;
}

const MultimodalRecord& record_for_id(const std::map<std::string, const MultimodalRecord*>& index,
                                      const std::string& id) {
    auto it = index.find(id);
    if (it == index.end())
        throw std::runtime_error("split references id '" + id + "' absent from the corpus");
    return *it->second;
}

PhaseLabel required_label(const MultimodalRecord& record) {
    if (!record.label)
        throw std::runtime_error("record '" + record.id + "' has no label; cannot evaluate");
    return *record.label;
}

std::string architecture_tag(ModelKind kind, TextEncoderKind text, BackboneKind image) {
    switch (kind) {
        case ModelKind::TextOnly: return "text-only";
        case ModelKind::ImageOnly: return "image-only/" + to_string(image);
        case ModelKind::Fusion: return "fusion/" + to_string(image);
    }
    (void)text;
    throw std::logic_error("bad model kind");
}

void annotate_reference(EvalReport& report, PhaseModel& model, bool generalization) {
    const ModelKind kind = model.kind();
    const TextEncoderKind text = model.config().text.kind;
    const BackboneKind image = model.config().image.kind;
    std::optional<double> ref = generalization ? generalization_reference_f1(kind, text, image)
                                               : reference_f1(kind, text, image);
    if (ref) report.reference.emplace_back(architecture_tag(kind, text, image), *ref);
}

}  // namespace

EvalReport evaluate_model(PhaseModel& model, const Corpus& corpus, const SplitAssignment& split,
                          const std::string& partition_tag, const std::string& headline) {
    auto index = record_index(corpus);
    std::vector<std::pair<PhaseLabel, PhaseLabel>> pairs;
    for (const std::string& id : split.ids_in(partition_tag)) {
        const MultimodalRecord& record = record_for_id(index, id);
        auto [predicted, probs] = model.predict(record.text, corpus.image_root / record.image_path);
        (void)probs;
        pairs.emplace_back(required_label(record), predicted);
    }
    if (pairs.empty())
        throw std::runtime_error("partition '" + partition_tag + "' selected no records");
    EvalReport report = metrics_from_confusion(confusion_matrix(pairs), headline);
    annotate_reference(report, model, false);
    return report;
}

std::vector<ErrorRecord> error_report(PhaseModel& model, const Corpus& corpus,
                                      const SplitAssignment& split,
                                      const std::string& partition_tag) {
    auto index = record_index(corpus);
    std::vector<ErrorRecord> errors;
    for (const std::string& id : split.ids_in(partition_tag)) {
        const MultimodalRecord& record = record_for_id(index, id);
        const PhaseLabel truth = required_label(record);
        auto [predicted, probs] = model.predict(record.text, corpus.image_root / record.image_path);
        if (predicted == truth) continue;
        ErrorRecord e;
        e.id = record.id;
        e.text = record.text;
        e.image_path = record.image_path;
        e.true_label = truth;
        e.predicted_label = predicted;
        for (int c = 0; c < kNumClasses; ++c)
            e.probabilities[static_cast<std::size_t>(c)] = probs(c);
        errors.push_back(std::move(e));
    }
    std::sort(errors.begin(), errors.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
        const double ca = a.probabilities[static_cast<std::size_t>(phase_index(a.predicted_label))];
        const double cb = b.probabilities[static_cast<std::size_t>(phase_index(b.predicted_label))];
        if (ca != cb) return ca > cb;
        return a.id < b.id;
    });
    return errors;
}

EvalReport generalization_eval(PhaseModel& model, const std::vector<std::string>& train_ids,
                               const std::string& source_tag, const Corpus& target,
                               const std::string& target_tag, const std::string& headline) {
    std::map<std::string, bool> trained;
    for (const std::string& id : train_ids) trained[id] = true;
    for (const MultimodalRecord& record : target.records)
        if (trained.count(record.id))
            throw std::runtime_error("leakage guard: id '" + record.id +
                                     "' appears both in the model's training set and in the "
                                     "target corpus");
    std::vector<std::pair<PhaseLabel, PhaseLabel>> pairs;
    for (const MultimodalRecord& record : target.records) {
        if (!record.label) continue;  // unlabeled target records carry no signal
        auto [predicted, probs] = model.predict(record.text, target.image_root / record.image_path);
        (void)probs;
        pairs.emplace_back(*record.label, predicted);
    }
    if (pairs.empty()) throw std::runtime_error("target corpus has no labeled records");
    EvalReport report = metrics_from_confusion(confusion_matrix(pairs), headline);
    report.source_tag = source_tag;
    report.target_tag = target_tag;
    annotate_reference(report, model, true);
    return report;
}

std::optional<double> reference_f1(ModelKind kind, TextEncoderKind text, BackboneKind image) {
    if (kind == ModelKind::TextOnly)
        return text == TextEncoderKind::PretrainedTransformer ? std::optional<double>(58.00)
                                                              : std::nullopt;
    if (kind == ModelKind::ImageOnly) {
        switch (image) {
            case BackboneKind::Vgg19: return 75.30;
            case BackboneKind::Resnet50: return 69.35;
            case BackboneKind::InceptionV3: return 71.52;
            default: return std::nullopt;
        }
    }
    if (text != TextEncoderKind::PretrainedTransformer) return std::nullopt;
    switch (image) {
        case BackboneKind::Vgg19: return 79.69;
        case BackboneKind::Resnet50: return 70.00;
        case BackboneKind::InceptionV3: return 79.06;
        case BackboneKind::InceptionV4: return 80.93;
        default: return std::nullopt;
    }
}

std::optional<double> generalization_reference_f1(ModelKind kind, TextEncoderKind text,
                                                  BackboneKind image) {
    switch (kind) {
        case ModelKind::TextOnly:
            return text == TextEncoderKind::PretrainedTransformer ? std::optional<double>(50.01)
                                                                  : std::nullopt;
        case ModelKind::ImageOnly:
            return image == BackboneKind::Vgg19 ? std::optional<double>(59.17) : std::nullopt;
        case ModelKind::Fusion:
            if (text == TextEncoderKind::PretrainedTransformer &&
                image == BackboneKind::InceptionV4)
                return 71.88;
            return std::nullopt;
    }
    return std::nullopt;
}

std::string eval_report_to_json(const EvalReport& report) {
    json per_class = json::object();
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
        per_class[std::string(phase_slug(phase_from_index(c)))] = {{"precision", m.precision},
                                                                   {"recall", m.recall},
                                                                   {"f1", m.f1},
                                                                   {"support", m.support}};
    }
    json confusion = json::array();
    for (const auto& row : report.confusion) confusion.push_back(row);
    json j{{"accuracy", report.accuracy},
           {"macro_f1", report.macro_f1},
           {"weighted_f1", report.weighted_f1},
           {"headline_metric", report.headline_metric_name},
           {"headline_value", report.headline()},
           {"zero_division_warnings", report.zero_division_warnings},
           {"per_class", per_class},
           {"confusion", confusion}};
    if (!report.source_tag.empty() || !report.target_tag.empty())
        j["domain_shift"] = {{"source", report.source_tag}, {"target", report.target_tag}};
    if (!report.reference.empty()) {
        json refs = json::array();
        for (const auto& [tag, value] : report.reference)
            refs.push_back({{"architecture", tag}, {"reported_f1_percent", value}});
        j["reference"] = refs;
    }
    return j.dump(2) + "\n";
}

std::string eval_report_to_text(const EvalReport& report) {
    std::string out;
    char line[256];
    if (!report.source_tag.empty() || !report.target_tag.empty()) {
        std::snprintf(line, sizeof(line), "domain shift: %s -> %s\n", report.source_tag.c_str(),
                      report.target_tag.c_str());
        out += line;
    }
    std::snprintf(line, sizeof(line),
                  "accuracy %.4f  macro_f1 %.4f  weighted_f1 %.4f  (headline: %s)\n",
                  report.accuracy, report.macro_f1, report.weighted_f1,
                  report.headline_metric_name.c_str());
    out += line;
    std::snprintf(line, sizeof(line), "%-28s %9s %9s %9s %9s\n", "class", "precision", "recall",
                  "f1", "support");
    out += line;
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
        std::snprintf(line, sizeof(line), "%-28s %9.4f %9.4f %9.4f %9lld\n",
                      std::string(phase_name(phase_from_index(c))).c_str(), m.precision, m.recall,
                      m.f1, static_cast<long long>(m.support));
        out += line;
    }
    out += "confusion (rows = true, cols = predicted):\n";
    for (const auto& row : report.confusion) {
        std::string r = " ";
        for (std::int64_t v : row) {
            std::snprintf(line, sizeof(line), " %6lld", static_cast<long long>(v));
            r += line;
        }
        out += r + "\n";
    }
    if (report.zero_division_warnings > 0) {
        std::snprintf(line, sizeof(line), "warning: %d zero-division case(s) reported as 0\n",
                      report.zero_division_warnings);
        out += line;
    }
    for (const auto& [tag, value] : report.reference) {
        std::snprintf(line, sizeof(line),
                      "reference: %s reported %.2f%% F1 on the original annotated corpus "
                      "(context only)\n",
                      tag.c_str(), value);
        out += line;
    }
    return out;
}

std::string error_report_to_csv(const std::vector<ErrorRecord>& records) {
    std::string out = "id,true_label,predicted_label,confidence,text,image_path";
    for (int c = 0; c < kNumClasses; ++c)
        out += ",p_" + std::string(phase_slug(phase_from_index(c)));
    out += "\n";
    for (const ErrorRecord& e : records) {
        const double confidence =
            e.probabilities[static_cast<std::size_t>(phase_index(e.predicted_label))];
        out += csv_escape(e.id) + "," + std::string(phase_slug(e.true_label)) + "," +
               std::string(phase_slug(e.predicted_label)) + "," + format_double(confidence) +
               "," + csv_escape(e.text) + "," + csv_escape(e.image_path);
        for (double p : e.probabilities) out += "," + format_double(p);
        out += "\n";
    }
    return out;
}

}  // namespace mmphase
