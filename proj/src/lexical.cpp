// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "lexical.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "util.hpp"

namespace mmphase {

void Lexicon::insert(const std::string& entry, bool is_prefix, int category) {
    int node = 0;
    for (char c : entry) {
        auto [it, added] = nodes_[static_cast<std::size_t>(node)].next.try_emplace(
            c, static_cast<int>(nodes_.size()));
        if (added) nodes_.emplace_back();
        node = it->second;
    }
    std::vector<int>& terminals =
        is_prefix ? nodes_[static_cast<std::size_t>(node)].prefix
                  : nodes_[static_cast<std::size_t>(node)].exact;
    if (std::find(terminals.begin(), terminals.end(), category) == terminals.end()) {
        terminals.push_back(category);
        ++entries_;
    }
}

Lexicon Lexicon::parse(const std::string& text) {
    Lexicon lexicon;
    int current_category = -1;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '%') {
            std::size_t space = line.find_first_of(" \t");
            std::string directive = line.substr(0, space);
            if (directive != "%category")
                throw std::runtime_error("unknown directive '" + directive + "' at line " +
                                         std::to_string(line_no));
            std::string name =
                space == std::string::npos ? std::string() : trim(line.substr(space + 1));
            if (name.empty())
                throw std::runtime_error("%category without a name at line " +
                                         std::to_string(line_no));
            if (std::find(lexicon.names_.begin(), lexicon.names_.end(), name) !=
                lexicon.names_.end())
                throw std::runtime_error("duplicate category '" + name + "' at line " +
                                         std::to_string(line_no));
            lexicon.names_.push_back(name);
            current_category = static_cast<int>(lexicon.names_.size()) - 1;
            continue;
        }
        if (current_category < 0)
            throw std::runtime_error("entry before any %category at line " +
                                     std::to_string(line_no));
        std::string entry = lower_ascii(line);
        bool is_prefix = false;
        if (entry.back() == '*') {
            is_prefix = true;
            entry.pop_back();
        }
        if (entry.empty())
            throw std::runtime_error("empty entry at line " + std::to_string(line_no));
        if (entry.find('*') != std::string::npos)
            throw std::runtime_error("'*' is only valid at the end of an entry (line " +
                                     std::to_string(line_no) + ")");
        lexicon.insert(entry, is_prefix, current_category);
    }
    if (lexicon.names_.empty()) throw std::runtime_error("no categories");
    return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    try {
        return parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::vector<int> Lexicon::match(const std::string& token) const {
    std::set<int> hits;
    int node = 0;
    for (std::size_t i = 0; i < token.size(); ++i) {
        // Prefix terminals fire on every strictly shorter path position too.
        for (int cat : nodes_[static_cast<std::size_t>(node)].prefix) hits.insert(cat);
        auto it = nodes_[static_cast<std::size_t>(node)].next.find(token[i]);
        if (it == nodes_[static_cast<std::size_t>(node)].next.end())
            return {hits.begin(), hits.end()};
        node = it->second;
    }
    for (int cat : nodes_[static_cast<std::size_t>(node)].prefix) hits.insert(cat);
    for (int cat : nodes_[static_cast<std::size_t>(node)].exact) hits.insert(cat);
    return {hits.begin(), hits.end()};
}

std::map<std::string, double> score_text(const std::string& text, const Lexicon& lexicon) {
    std::vector<std::string> tokens = word_tokens(text);
    if (tokens.empty()) throw std::runtime_error("text has no tokens");
    std::vector<std::size_t> counts(lexicon.categories().size(), 0);
    for (const std::string& token : tokens)
        for (int cat : lexicon.match(token)) ++counts[static_cast<std::size_t>(cat)];
    std::map<std::string, double> out;
    for (std::size_t c = 0; c < counts.size(); ++c)
        out[lexicon.categories()[c]] =
            100.0 * static_cast<double>(counts[c]) / static_cast<double>(tokens.size());
    return out;
}

LexicalProfile per_class_profile(const std::vector<MultimodalRecord>& records,
                                 const Lexicon& lexicon) {
    LexicalProfile profile;
    profile.categories = lexicon.categories();
    std::map<PhaseLabel, std::vector<double>> sums;
    for (const MultimodalRecord& record : records) {
        if (!record.label)
            throw std::runtime_error("record '" + record.id +
                                     "' has no label; profile needs a labeled corpus");
        std::map<std::string, double> scores;
        try {
            scores = score_text(record.text, lexicon);
        } catch (const std::exception&) {
            ++profile.skipped_documents;
            continue;
        }
        auto [it, added] = sums.try_emplace(*record.label,
                                            std::vector<double>(profile.categories.size(), 0.0));
        (void)added;
        for (std::size_t c = 0; c < profile.categories.size(); ++c)
            it->second[c] += scores.at(profile.categories[c]);
        ++profile.class_documents[*record.label];
    }
    for (auto& [label, sum] : sums) {
        const double n = static_cast<double>(profile.class_documents.at(label));
        std::vector<double> means(sum.size());
        for (std::size_t c = 0; c < sum.size(); ++c) means[c] = sum[c] / n;
        profile.class_means.emplace(label, std::move(means));
    }
    return profile;
}

std::string profile_to_csv(const LexicalProfile& profile) {
    std::string out = "class,documents";
    for (const std::string& category : profile.categories) out += "," + csv_escape(category);
    out += "\n";
    for (const auto& [label, means] : profile.class_means) {
        out += std::string(phase_slug(label)) + "," +
               std::to_string(profile.class_documents.at(label));
        for (double mean : means) out += "," + format_double(mean);
        out += "\n";
    }
    return out;
}

}  // namespace mmphase
