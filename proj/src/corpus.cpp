// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "image_io.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace mmphase {

using nlohmann::json;

std::vector<MultimodalRecord> Corpus::labeled() const {
    std::vector<MultimodalRecord> out;
    for (const auto& r : records) {
        if (r.label) out.push_back(r);
    }
    return out;
}

std::size_t Corpus::unlabeled_count() const {
    std::size_t n = 0;
    for (const auto& r : records) {
        if (!r.label) ++n;
    }
    return n;
}

IngestResult read_manifest(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& image_root, bool verify_images) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw std::runtime_error("cannot open manifest: " + manifest_path.string());
    }

    IngestResult result;
    result.corpus.image_root = image_root;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception&) {
            result.rejections.push_back({line_no, "", "invalid json"});
            continue;
        }
        if (!obj.is_object()) {
            result.rejections.push_back({line_no, "", "invalid json"});
            continue;
        }

        std::string id = obj.value("id", "");
        if (trim(id).empty()) {
            result.rejections.push_back({line_no, "", "missing id"});
            continue;
        }
        if (!obj.contains("text") || !obj["text"].is_string() ||
            trim(obj["text"].get<std::string>()).empty()) {
            result.rejections.push_back({line_no, id, "missing text"});
            continue;
        }
        if (!obj.contains("image") || !obj["image"].is_string() ||
            obj["image"].get<std::string>().empty()) {
            result.rejections.push_back({line_no, id, "no image"});
            continue;
        }

        MultimodalRecord rec;
        rec.id = id;
        rec.text = obj["text"].get<std::string>();
        rec.image_path = obj["image"].get<std::string>();
        rec.source = obj.value("source", "");
        rec.created_at = obj.value("created_at", "");

        if (obj.contains("label") && !obj["label"].is_null()) {
            if (!obj["label"].is_string()) {
                result.rejections.push_back({line_no, id, "unknown label"});
                continue;
            }
            auto parsed = parse_phase(obj["label"].get<std::string>());
            if (!parsed) {
                result.rejections.push_back({line_no, id, "unknown label"});
                continue;
            }
            rec.label = *parsed;
        }

        if (verify_images && !image_decodes(image_root / rec.image_path)) {
            result.rejections.push_back({line_no, id, "unreadable image"});
            continue;
        }

        result.corpus.records.push_back(std::move(rec));
    }
    return result;
}

IngestResult ingest_manifest(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& image_root) {
    return read_manifest(manifest_path, image_root, /*verify_images=*/true);
}

void write_manifest(const Corpus& corpus, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& r : corpus.records) {
        json obj;
        obj["id"] = r.id;
        obj["text"] = r.text;
        obj["image"] = r.image_path;
        if (r.label) obj["label"] = std::string(phase_name(*r.label));
        if (!r.source.empty()) obj["source"] = r.source;
        if (!r.created_at.empty()) obj["created_at"] = r.created_at;
        out << obj.dump() << "\n";
    }
    write_text_file(path, out.str());
}

std::string normalized_text_key(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string token;
    std::string key;
    while (in >> token) {
        std::string low = lower_ascii(token);
        if (low.rfind("http://", 0) == 0 || low.rfind("https://", 0) == 0 ||
            low.rfind("www.", 0) == 0 || low[0] == '@') {
            continue;
        }
        if (!key.empty()) key.push_back(' ');
        key += low;
    }
    return key;
}

DedupResult deduplicate(const std::vector<MultimodalRecord>& records) {
    // Survivor per key is the lexicographically smallest id, so sort by id
    // first and keep first-seen.
    std::vector<MultimodalRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const MultimodalRecord& a, const MultimodalRecord& b) { return a.id < b.id; });

    DedupResult out;
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> seen_texts;
    for (auto& rec : sorted) {
        if (!seen_ids.insert(rec.id).second) {
            ++out.dropped_duplicates;
            continue;
        }
        if (!seen_texts.insert(normalized_text_key(rec.text)).second) {
            ++out.dropped_duplicates;
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

CorpusStats class_distribution(const std::vector<MultimodalRecord>& records) {
    CorpusStats stats;
    for (const auto& rec : records) {
        if (!rec.label) {
            throw std::runtime_error("class_distribution: record without label: " + rec.id);
        }
        ++stats.per_class[static_cast<std::size_t>(phase_index(*rec.label))];
        ++stats.total;
    }
    return stats;
}

namespace {

// ids per class, sorted for a deterministic starting order.
std::array<std::vector<std::string>, kNumClasses> ids_by_class(
    const std::vector<MultimodalRecord>& records, const char* op) {
    std::array<std::vector<std::string>, kNumClasses> by_class;
    for (const auto& rec : records) {
        if (!rec.label) {
            throw std::runtime_error(std::string(op) + ": record without label: " + rec.id);
        }
        by_class[static_cast<std::size_t>(phase_index(*rec.label))].push_back(rec.id);
    }
    for (auto& ids : by_class) {
        std::sort(ids.begin(), ids.end());
    }
    return by_class;
}

}  // namespace

SplitAssignment stratified_split(const std::vector<MultimodalRecord>& records,
                                 double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0, 1)");
    }
    auto by_class = ids_by_class(records, "stratified_split");

    std::size_t total = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const std::size_t n = by_class[c].size();
        if (n == 1) {
            throw std::runtime_error("cannot stratify: class \"" +
                                     std::string(phase_slug(phase_from_index(c))) +
                                     "\" has fewer than 2 records");
        }
        total += n;
    }
    if (total == 0) {
        throw std::runtime_error("cannot split an empty corpus");
    }

    const std::size_t train_total =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total)));

    // Floor allocation plus largest-remainder for the deficit.
    std::array<std::size_t, kNumClasses> train_count{};
    std::vector<std::pair<double, int>> remainders;  // (-remainder, class) for sorting
    std::size_t allocated = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double exact = train_fraction * static_cast<double>(by_class[c].size());
        train_count[c] = static_cast<std::size_t>(std::floor(exact));
        allocated += train_count[c];
        remainders.push_back({-(exact - std::floor(exact)), c});
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t i = 0; allocated < train_total; ++i, ++allocated) {
        ++train_count[remainders[i].second];
    }

    SplitAssignment split;
    split.seed = seed;
    for (int c = 0; c < kNumClasses; ++c) {
        auto ids = by_class[c];
        Rng rng = Rng::stream(seed, {0x73706c6974ull /*split*/, static_cast<std::uint64_t>(c)});
        rng.shuffle(ids);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            split.partition[ids[i]] = i < train_count[c] ? "train" : "test";
        }
    }
    return split;
}

std::vector<SplitAssignment> kfold_split(const std::vector<MultimodalRecord>& records, int k,
                                         std::uint64_t seed) {
    if (k < 2) {
        throw ConfigError("kfold_split: k must be at least 2");
    }
    auto by_class = ids_by_class(records, "kfold_split");
    for (int c = 0; c < kNumClasses; ++c) {
        const std::size_t n = by_class[c].size();
        if (n > 0 && n < static_cast<std::size_t>(k)) {
            throw std::runtime_error("kfold_split: class \"" +
                                     std::string(phase_slug(phase_from_index(c))) +
                                     "\" has fewer records than folds");
        }
    }

    // Per class: n/k per fold, remainder spread one per fold. The start fold
    // of each class's remainder run advances cumulatively so overall fold
    // sizes stay within one of each other.
    std::vector<std::vector<std::string>> fold_ids(static_cast<std::size_t>(k));
    int extra_offset = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        auto ids = by_class[c];
        if (ids.empty()) continue;
        Rng rng = Rng::stream(seed, {0x6b666f6c64ull /*kfold*/, static_cast<std::uint64_t>(c)});
        rng.shuffle(ids);

        const std::size_t base = ids.size() / static_cast<std::size_t>(k);
        const int extras = static_cast<int>(ids.size() % static_cast<std::size_t>(k));
        std::vector<std::size_t> count(static_cast<std::size_t>(k), base);
        for (int j = 0; j < extras; ++j) {
            count[static_cast<std::size_t>((extra_offset + j) % k)] += 1;
        }
        extra_offset = (extra_offset + extras) % k;

        std::size_t next = 0;
        for (int f = 0; f < k; ++f) {
            for (std::size_t i = 0; i < count[static_cast<std::size_t>(f)]; ++i) {
                fold_ids[static_cast<std::size_t>(f)].push_back(ids[next++]);
            }
        }
    }

    std::vector<SplitAssignment> views;
    for (int f = 0; f < k; ++f) {
        SplitAssignment view;
        view.seed = seed;
        for (int g = 0; g < k; ++g) {
            for (const auto& id : fold_ids[static_cast<std::size_t>(g)]) {
                view.partition[id] = (g == f) ? "test" : "train";
            }
        }
        views.push_back(std::move(view));
    }
    return views;
}

SplitAssignment kfold_tags(const std::vector<SplitAssignment>& folds) {
    SplitAssignment tags;
    if (folds.empty()) return tags;
    tags.seed = folds.front().seed;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (const auto& [id, part] : folds[f].partition) {
            if (part == "test") {
                tags.partition[id] = "fold-" + std::to_string(f + 1);
            }
        }
    }
    return tags;
}

std::vector<std::string> SplitAssignment::ids_in(std::string_view tag) const {
    std::vector<std::string> out;
    for (const auto& [id, part] : partition) {
        if (part == tag) out.push_back(id);
    }
    return out;
}

std::string SplitAssignment::fingerprint() const {
    std::uint64_t h = fnv1a64("split", 0xcbf29ce484222325ull);
    for (const auto& [id, part] : partition) {
        h = fnv1a64(id, h);
        h = fnv1a64("\t", h);
        h = fnv1a64(part, h);
        h = fnv1a64("\n", h);
    }
    return fingerprint_hex(h);
}

void write_split(const SplitAssignment& split, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& [id, part] : split.partition) {
        out << id << "\t" << part << "\n";
    }
    write_text_file(path, out.str());
}

SplitAssignment read_split(const std::filesystem::path& path) {
    SplitAssignment split;
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open split file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw std::runtime_error("malformed split line " + std::to_string(line_no) + " in " +
                                     path.string());
        }
        split.partition[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return split;
}

AgreementReport inter_annotator_agreement(const std::map<std::string, PhaseLabel>& ratings_a,
                                          const std::map<std::string, PhaseLabel>& ratings_b) {
    std::vector<std::string> only_a;
    std::vector<std::string> only_b;
    for (const auto& [id, _] : ratings_a) {
        if (!ratings_b.count(id)) only_a.push_back(id);
    }
    for (const auto& [id, _] : ratings_b) {
        if (!ratings_a.count(id)) only_b.push_back(id);
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::ostringstream msg;
        msg << "rating id sets differ;";
        if (!only_a.empty()) {
            msg << " only in a:";
            for (const auto& id : only_a) msg << " " << id;
        }
        if (!only_b.empty()) {
            msg << " only in b:";
            for (const auto& id : only_b) msg << " " << id;
        }
        throw std::runtime_error(msg.str());
    }
    if (ratings_a.empty()) {
        throw std::runtime_error("agreement over an empty id set");
    }

    const double n = static_cast<double>(ratings_a.size());
    std::array<double, kNumClasses> freq_a{};
    std::array<double, kNumClasses> freq_b{};
    double matches = 0.0;
    for (const auto& [id, label_a] : ratings_a) {
        const PhaseLabel label_b = ratings_b.at(id);
        freq_a[static_cast<std::size_t>(phase_index(label_a))] += 1.0;
        freq_b[static_cast<std::size_t>(phase_index(label_b))] += 1.0;
        if (label_a == label_b) matches += 1.0;
    }

    AgreementReport report;
    report.items = ratings_a.size();
    report.percent_agreement = matches / n;
    if (matches == n) {
        report.cohen_kappa = 1.0;  // exact by definition, avoids 0/0
        return report;
    }
    double p_e = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        p_e += (freq_a[c] / n) * (freq_b[c] / n);
    }
    report.cohen_kappa = (report.percent_agreement - p_e) / (1.0 - p_e);
    return report;
}

std::string corpus_fingerprint(const Corpus& corpus) {
    std::uint64_t h = fnv1a64("corpus", 0xcbf29ce484222325ull);
    for (const auto& r : corpus.records) {
        h = fnv1a64(r.id, h);
        h = fnv1a64(r.text, h);
        h = fnv1a64(r.image_path, h);
        h = fnv1a64(r.label ? phase_name(*r.label) : "-", h);
        h = fnv1a64(r.source, h);
        h = fnv1a64(r.created_at, h);
    }
    return fingerprint_hex(h);
}

}  // namespace mmphase
