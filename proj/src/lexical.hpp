// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Dictionary-based language profiling: categories of words or prefixes are
// counted per document as a percentage of tokens, then averaged per class.
// Ships with small open starter lexicons; accepts user-supplied files.

#ifndef MMPHASE_LEXICAL_HPP
#define MMPHASE_LEXICAL_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "phase.hpp"

namespace mmphase {

// Lexicon file format: UTF-8 text; "%category <name>" opens a category, each
// following line is one entry, a trailing '*' marks a prefix, '#' comments.
class Lexicon {
  public:
    static Lexicon parse(const std::string& text);
    static Lexicon load(const std::filesystem::path& path);

    const std::vector<std::string>& categories() const { return names_; }
    std::size_t entry_count() const { return entries_; }

    // Sorted unique indices into categories() that the token matches.
    std::vector<int> match(const std::string& token) const;

  private:
    struct Node {
        std::map<char, int> next;
        std::vector<int> exact;   // categories with a full-word entry ending here
        std::vector<int> prefix;  // categories with a prefix entry ending here
    };

    void insert(const std::string& entry, bool is_prefix, int category);

    std::vector<Node> nodes_{Node{}};
    std::vector<std::string> names_;
    std::size_t entries_ = 0;
};

// Percentage of tokens matching each category (same tokenization as the rest
// of the pipeline). A token may count toward several categories. Zero tokens
// is an error.
std::map<std::string, double> score_text(const std::string& text, const Lexicon& lexicon);

struct LexicalProfile {
    std::vector<std::string> categories;
    // Only classes with at least one scoreable document appear.
    std::map<PhaseLabel, std::vector<double>> class_means;  // aligned with categories
    std::map<PhaseLabel, std::size_t> class_documents;
    std::size_t skipped_documents = 0;  // zero-token texts carry no signal
};

// All records must be labeled.
LexicalProfile per_class_profile(const std::vector<MultimodalRecord>& records,
                                 const Lexicon& lexicon);

std::string profile_to_csv(const LexicalProfile& profile);

}  // namespace mmphase

#endif
