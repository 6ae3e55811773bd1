// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rgs/core_math.hpp"

#include <filesystem>
#include <vector>

namespace rgs {

/// Row-major H x W x 3 image of doubles.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, double fill = 0.0) : width(w), height(h), data(std::size_t(w) * h * 3, fill) {}

    std::size_t index(int x, int y) const { return (std::size_t(y) * width + x) * 3; }
    double& operator()(int x, int y, int c) { return data[index(x, y) + c]; }
    double operator()(int x, int y, int c) const { return data[index(x, y) + c]; }
    Vec3d pixel(int x, int y) const {
        const std::size_t i = index(x, y);
        return Vec3d(data[i], data[i + 1], data[i + 2]);
    }
    void set_pixel(int x, int y, const Vec3d& v) {
        const std::size_t i = index(x, y);
        data[i] = v[0];
        data[i + 1] = v[1];
        data[i + 2] = v[2];
    }
    bool same_shape(const ImageBuffer& o) const { return width == o.width && height == o.height; }
    bool operator==(const ImageBuffer&) const = default;
};

/// 8-bit RGB PNG, values round(clamp(c, 0, 1) * 255).
void write_png(const ImageBuffer& img, const std::filesystem::path& path);
/// Reads 8-bit gray/RGB/RGBA PNG into [0, 1] values (alpha dropped).
ImageBuffer read_png(const std::filesystem::path& path);

/// NumPy .npy (v1.0), little-endian float32, shape (H, W, 3).
void write_npy(const ImageBuffer& img, const std::filesystem::path& path);
ImageBuffer read_npy(const std::filesystem::path& path);

/// Quantizes to the 8-bit grid write_png uses.
ImageBuffer quantize8(const ImageBuffer& img);

} // namespace rgs
