// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Binary little-endian PLY in the layout common 3DGS viewers read:
//   x y z nx ny nz f_dc_0..2 f_rest_0..N opacity scale_0..2 rot_0..3
// all float32. f_rest is channel-major (all red coefficients first).
#pragma once

#include "rgs/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace rgs {

class PlyError : public std::runtime_error {
public:
    enum class Kind { MissingHeader, MalformedHeader, UnsupportedFormat, UnknownLayout, Truncated, Io };

    PlyError(Kind kind, std::uint64_t byte_offset, std::string element, const std::string& message);

    Kind kind() const { return kind_; }
    std::uint64_t byte_offset() const { return offset_; }
    const std::string& element() const { return element_; }

private:
    Kind kind_;
    std::uint64_t offset_;
    std::string element_;
};

void write_ply(const Scene& scene, const std::filesystem::path& path);
Scene read_ply(const std::filesystem::path& path);

/// In-memory variants, used by the file versions and by tests.
std::string encode_ply(const Scene& scene);
Scene decode_ply(const std::string& bytes);

} // namespace rgs
