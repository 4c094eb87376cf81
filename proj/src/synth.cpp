// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "synth.hpp"

#include <algorithm>
#include <cstdio>

#include "image_io.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace mmphase {

const char* const kSynthKeywordA = "harbor";
const char* const kSynthKeywordB = "metro";

namespace {

// Filler vocabulary; must not contain either keyword and carries no label
// signal (drawn uniformly for every record).
const char* const kFillers[] = {
    "the",    "group",   "reached", "camp",    "near",    "river",  "crossing",
    "old",    "station", "families", "walked", "toward",  "gate",   "evening",
    "morning", "shelter", "line",    "waiting", "food",    "bags",
};
constexpr std::size_t kFillerCount = sizeof(kFillers) / sizeof(kFillers[0]);

std::uint8_t clamp_byte(int v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

// Warm (red-dominant) or cool (blue-dominant) color field with mild jitter;
// the channel-mean ordering is the image bit.
RasterImage color_field_image(int size, int image_bit, Rng& rng) {
    const int base_r = image_bit == 0 ? 200 : 40;
    const int base_g = image_bit == 0 ? 60 : 80;
    const int base_b = image_bit == 0 ? 40 : 200;
    RasterImage img;
    img.height = size;
    img.width = size;
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(size) * size * 3);
    std::size_t p = 0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const int jitter = static_cast<int>(rng.next_below(31)) - 15;
            img.pixels[p++] = clamp_byte(base_r + jitter);
            img.pixels[p++] = clamp_byte(base_g + jitter);
            img.pixels[p++] = clamp_byte(base_b + jitter);
        }
    }
    return img;
}

// Chart-like gray grid: light panel with dark rules every 8 pixels.
RasterImage grid_image(int size, Rng& rng) {
    RasterImage img;
    img.height = size;
    img.width = size;
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(size) * size * 3);
    std::size_t p = 0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const bool rule = (x % 8 == 0) || (y % 8 == 0);
            const int base = rule ? 40 : 230;
            const int jitter = static_cast<int>(rng.next_below(11)) - 5;
            const std::uint8_t v = clamp_byte(base + jitter);
            img.pixels[p++] = v;
            img.pixels[p++] = v;
            img.pixels[p++] = v;
        }
    }
    return img;
}

std::string keyword_text(int text_bit, Rng& rng) {
    const std::size_t filler_words = 3 + rng.next_below(5);  // 3..7
    std::vector<std::string> words;
    for (std::size_t i = 0; i < filler_words; ++i)
        words.emplace_back(kFillers[rng.next_below(kFillerCount)]);
    const std::size_t at = rng.next_below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at),
                 text_bit == 0 ? kSynthKeywordA : kSynthKeywordB);
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out += ' ';
        out += words[i];
    }
    return out;
}

std::string numeric_text(Rng& rng) {
    const std::size_t count = 4 + rng.next_below(5);  // 4..8 numbers
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(rng.next_below(10000));
    }
    return out;
}

}  // namespace

SynthResult generate_synthetic_corpus(const SynthConfig& config) {
    if (config.n < 50)
        throw ConfigError("synthetic corpus needs n >= 50 (got " + std::to_string(config.n) + ")");
    if (config.image_size < 16) throw ConfigError("synthetic image_size must be at least 16");

    const std::filesystem::path image_dir = config.out_dir / "images";
    std::filesystem::create_directories(image_dir);

    Corpus corpus;
    corpus.image_root = config.out_dir;
    SynthResult result;
    for (std::size_t i = 0; i < config.n; ++i) {
        const int cls = static_cast<int>(i % kNumClasses);
        Rng rng = Rng::stream(config.seed, {0x73796e74, static_cast<std::uint64_t>(i)});

        // The seed is part of the id so corpora generated with different
        // seeds have disjoint id sets and can serve as source/target pairs
        // in the generalization protocol.
        char name[48];
        std::snprintf(name, sizeof(name), "synth-%llu-%06zu",
                      static_cast<unsigned long long>(config.seed), i);
        char file[64];
        std::snprintf(file, sizeof(file), "images/%s.png", name);

        RasterImage image;
        std::string text;
        if (cls == 4) {
            image = grid_image(config.image_size, rng);
            text = numeric_text(rng);
        } else {
            const int image_bit = cls >> 1;
            const int text_bit = cls & 1;
            image = color_field_image(config.image_size, image_bit, rng);
            text = keyword_text(text_bit, rng);
        }
        write_png(config.out_dir / file, image);

        MultimodalRecord record;
        record.id = name;
        record.text = std::move(text);
        record.image_path = file;
        record.label = phase_from_index(cls);
        record.source = "synthetic";
        corpus.records.push_back(std::move(record));
        ++result.per_class[static_cast<std::size_t>(cls)];
    }
    result.manifest_path = config.out_dir / "manifest.jsonl";
    result.image_root = config.out_dir;
    result.records = config.n;
    write_manifest(corpus, result.manifest_path);
    return result;
}

}  // namespace mmphase
