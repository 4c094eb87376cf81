// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mmphase {

namespace {

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

RasterImage decode_jpeg(const std::filesystem::path& path) {
    FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) {
        throw std::runtime_error("cannot open image: " + path.string());
    }

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_trampoline;

    RasterImage out;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(fp);
        throw std::runtime_error("jpeg decode failed for " + path.string() + ": " + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    out.width = static_cast<int>(cinfo.output_width);
    out.height = static_cast<int>(cinfo.output_height);
    out.channels = 3;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * 3);

    const std::size_t stride = static_cast<std::size_t>(out.width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.pixels.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    return out;
}

RasterImage decode_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;

    if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
        std::string msg = img.message;
        png_image_free(&img);
        throw std::runtime_error("png decode failed for " + path.string() + ": " + msg);
    }
    img.format = PNG_FORMAT_RGBA;

    RasterImage out;
    out.width = static_cast<int>(img.width);
    out.height = static_cast<int>(img.height);
    out.channels = 4;
    out.pixels.resize(PNG_IMAGE_SIZE(img));

    if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw std::runtime_error("png decode failed for " + path.string() + ": " + msg);
    }
    return out;
}

}  // namespace

RasterImage decode_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
        throw std::runtime_error("cannot open image: " + path.string());
    }
    unsigned char magic[4] = {0, 0, 0, 0};
    probe.read(reinterpret_cast<char*>(magic), sizeof(magic));
    probe.close();

    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G') {
        return decode_png(path);
    }
    if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
        return decode_jpeg(path);
    }
    throw std::runtime_error("unsupported image format: " + path.string());
}

bool image_decodes(const std::filesystem::path& path) noexcept {
    try {
        RasterImage img = decode_image(path);
        return img.width > 0 && img.height > 0;
    } catch (...) {
        return false;
    }
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
    if (image.channels != 3) {
        throw std::runtime_error("write_png expects 3-channel input");
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;

    if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.pixels.data(), 0,
                                 nullptr)) {
        std::string msg = img.message;
        throw std::runtime_error("png write failed for " + path.string() + ": " + msg);
    }
}

ImageTensor to_float_rgb(const RasterImage& image) {
    ImageTensor out(image.height, image.width, 3);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            double r = 0.0;
            double g = 0.0;
            double b = 0.0;
            switch (image.channels) {
                case 1: {
                    const double v = image.at(y, x, 0) / 255.0;
                    r = g = b = v;
                    break;
                }
                case 3:
                case 4:  // alpha dropped
                    r = image.at(y, x, 0) / 255.0;
                    g = image.at(y, x, 1) / 255.0;
                    b = image.at(y, x, 2) / 255.0;
                    break;
                default:
                    throw std::runtime_error("unsupported channel count: " +
                                             std::to_string(image.channels));
            }
            out.at(y, x, 0) = r;
            out.at(y, x, 1) = g;
            out.at(y, x, 2) = b;
        }
    }
    return out;
}

ImageTensor bilinear_resize(const ImageTensor& src, int out_height, int out_width) {
    if (out_height <= 0 || out_width <= 0) {
        throw std::runtime_error("bilinear_resize: output size must be positive");
    }
    if (src.height == out_height && src.width == out_width) {
        return src;
    }
    ImageTensor out(out_height, out_width, src.channels);
    const double scale_y = static_cast<double>(src.height) / out_height;
    const double scale_x = static_cast<double>(src.width) / out_width;

    for (int y = 0; y < out_height; ++y) {
        const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, src.height - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_width; ++x) {
            const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, src.width - 1.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - x0;
            for (int c = 0; c < src.channels; ++c) {
                const double top = src.at(y0, x0, c) * (1.0 - fx) + src.at(y0, x1, c) * fx;
                const double bot = src.at(y1, x0, c) * (1.0 - fx) + src.at(y1, x1, c) * fx;
                out.at(y, x, c) = top * (1.0 - fy) + bot * fy;
            }
        }
    }
    return out;
}

}  // namespace mmphase
