// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

namespace rgs {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

ImageBuffer quantize8(const ImageBuffer& img) {
    ImageBuffer out = img;
    for (auto& v : out.data) v = to_byte(v) / 255.0;
    return out;
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng initialization failed");
    }
    std::vector<unsigned char> row(std::size_t(img.width) * 3);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng failed writing '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) row[std::size_t(x) * 3 + c] = to_byte(img(x, y, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImageBuffer read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open '" + path.string() + "'");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng initialization failed");
    }
    ImageBuffer img;
    std::vector<unsigned char> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("'" + path.string() + "' is not a readable PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int type = png_get_color_type(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if ((type == PNG_COLOR_TYPE_GRAY || type == PNG_COLOR_TYPE_GRAY_ALPHA) && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (type == PNG_COLOR_TYPE_GRAY || type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    row.resize(rowbytes);
    img = ImageBuffer(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img(x, y, c) = row[std::size_t(x) * 3 + c] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_npy(const ImageBuffer& img, const std::filesystem::path& path) {
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(img.height) + ", " +
                         std::to_string(img.width) + ", 3), }";
    // magic(6) + version(2) + len(2) + header, padded with spaces to a multiple of 64, ending in '\n'
    const std::size_t total = 10 + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header.push_back('\n');
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    const unsigned char magic[8] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    f.write(reinterpret_cast<const char*>(magic), 8);
    const std::uint16_t len = static_cast<std::uint16_t>(header.size());
    const unsigned char len_le[2] = {static_cast<unsigned char>(len & 0xff), static_cast<unsigned char>(len >> 8)};
    f.write(reinterpret_cast<const char*>(len_le), 2);
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : img.data) {
        const float x = static_cast<float>(v);
        f.write(reinterpret_cast<const char*>(&x), 4);
    }
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ImageBuffer read_npy(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
    unsigned char pre[10];
    f.read(reinterpret_cast<char*>(pre), 10);
    if (!f || pre[0] != 0x93 || std::memcmp(pre + 1, "NUMPY", 5) != 0 || pre[6] != 1) {
        throw std::runtime_error("'" + path.string() + "' is not a v1 .npy file");
    }
    const std::size_t len = pre[8] | (std::size_t(pre[9]) << 8);
    std::string header(len, '\0');
    f.read(header.data(), static_cast<std::streamsize>(len));
    if (header.find("'<f4'") == std::string::npos || header.find("False") == std::string::npos) {
        throw std::runtime_error("'" + path.string() + "': only C-order float32 arrays are supported");
    }
    int h = 0, w = 0, c = 0;
    const auto s = header.find("'shape': (");
    if (s == std::string::npos || std::sscanf(header.c_str() + s, "'shape': (%d, %d, %d)", &h, &w, &c) != 3 ||
        c != 3) {
        throw std::runtime_error("'" + path.string() + "': expected shape (H, W, 3)");
    }
    ImageBuffer img(w, h);
    for (auto& v : img.data) {
        float x;
        f.read(reinterpret_cast<char*>(&x), 4);
        v = x;
    }
    if (!f) throw std::runtime_error("'" + path.string() + "': truncated data");
    return img;
}

} // namespace rgs
