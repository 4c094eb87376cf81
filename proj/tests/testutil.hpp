// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Shared fixtures for the test suites: scratch directories, tiny PNGs and
// synthetic record lists.

#ifndef MMPHASE_TESTUTIL_HPP
#define MMPHASE_TESTUTIL_HPP

#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "image_io.hpp"
#include "phase.hpp"

namespace mmptest {

// Self-deleting scratch directory under the system temp root.
class TempDir {
  public:
    TempDir() {
        const auto base = std::filesystem::temp_directory_path();
        static std::atomic<std::uint64_t> counter{0};
        const auto unique = std::to_string(::getpid()) + "-" +
                            std::to_string(counter.fetch_add(1)) + "-" +
                            std::to_string(std::random_device{}());
        path_ = base / ("mmphase-test-" + unique);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Solid-color RGB PNG.
inline void write_solid_png(const std::filesystem::path& path, int size, std::uint8_t r,
                            std::uint8_t g, std::uint8_t b) {
    mmphase::RasterImage img;
    img.height = size;
    img.width = size;
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(size) * size * 3);
    for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    std::filesystem::create_directories(path.parent_path());
    mmphase::write_png(path, img);
}

inline mmphase::MultimodalRecord make_record(const std::string& id, const std::string& text,
                                             std::optional<mmphase::PhaseLabel> label = {},
                                             const std::string& image = "",
                                             const std::string& source = "") {
    mmphase::MultimodalRecord r;
    r.id = id;
    r.text = text;
    r.image_path = image;
    r.label = label;
    r.source = source;
    return r;
}

// `counts[c]` labeled records of class c, ids "c<c>-<i>", no image files.
inline std::vector<mmphase::MultimodalRecord> labeled_records(
    const std::array<std::size_t, mmphase::kNumClasses>& counts) {
    std::vector<mmphase::MultimodalRecord> records;
    for (int c = 0; c < mmphase::kNumClasses; ++c) {
        for (std::size_t i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) {
            records.push_back(make_record("c" + std::to_string(c) + "-" + std::to_string(i),
                                          "text " + std::to_string(c) + " " + std::to_string(i),
                                          mmphase::phase_from_index(c)));
        }
    }
    return records;
}

}  // namespace mmptest

#endif
