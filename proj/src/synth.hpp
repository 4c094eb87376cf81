// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Synthetic complementary-modality corpus for the acceptance experiment.
// Classes 0-3 encode label = 2*b_img + b_txt, where b_img is carried only by
// the image (warm vs cool color field) and b_txt only by the text (one of two
// keywords); class 4 is chart-like grid images with numeric text. By
// construction neither modality alone resolves classes 0-3 beyond a coin
// flip.

#ifndef MMPHASE_SYNTH_HPP
#define MMPHASE_SYNTH_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "corpus.hpp"

namespace mmphase {

struct SynthConfig {
    std::size_t n = 1000;
    std::uint64_t seed = 7;
    std::filesystem::path out_dir;
    int image_size = 32;  // matches the tiny backbone input
};

struct SynthResult {
    std::filesystem::path manifest_path;
    std::filesystem::path image_root;
    std::size_t records = 0;
    std::array<std::size_t, kNumClasses> per_class{};
};

// The keywords that carry the text bit (exposed for the enumeration oracle).
extern const char* const kSynthKeywordA;  // b_txt = 0
extern const char* const kSynthKeywordB;  // b_txt = 1

// Writes out_dir/manifest.jsonl and out_dir/images/*.png. Same config →
// byte-identical artifacts. Requires n >= 50.
SynthResult generate_synthetic_corpus(const SynthConfig& config);

}  // namespace mmphase

#endif
