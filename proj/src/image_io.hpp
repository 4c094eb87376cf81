// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#ifndef MMPHASE_IMAGE_IO_HPP
#define MMPHASE_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mmphase {

// 8-bit interleaved pixels, 1, 3 or 4 channels.
struct RasterImage {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Planar-free float tensor, height x width x channels, row-major interleaved.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> values;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c)
        : height(h), width(w), channels(c),
          values(static_cast<std::size_t>(h) * w * c, 0.0) {}

    double& at(int y, int x, int c) {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t size() const { return values.size(); }
};

// PNG or JPEG, detected from the file's magic bytes. Throws on failure.
RasterImage decode_image(const std::filesystem::path& path);

bool image_decodes(const std::filesystem::path& path) noexcept;

// 3-channel 8-bit PNG.
void write_png(const std::filesystem::path& path, const RasterImage& image);

// Grayscale replicated to 3 channels, alpha dropped, values scaled to [0,1].
ImageTensor to_float_rgb(const RasterImage& image);

// Bilinear, half-pixel-center convention, channels preserved.
ImageTensor bilinear_resize(const ImageTensor& src, int out_height, int out_width);

}  // namespace mmphase

#endif
