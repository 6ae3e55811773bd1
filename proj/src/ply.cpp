// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/ply.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <vector>

namespace rgs {

namespace {

const char* kind_name(PlyError::Kind kind) {
    switch (kind) {
    case PlyError::Kind::MissingHeader: return "missing header";
    case PlyError::Kind::MalformedHeader: return "malformed header";
    case PlyError::Kind::UnsupportedFormat: return "unsupported format";
    case PlyError::Kind::UnknownLayout: return "unknown property layout";
    case PlyError::Kind::Truncated: return "truncated payload";
    case PlyError::Kind::Io: return "i/o error";
    }
    return "error";
}

std::vector<std::string> property_names(int sh_degree) {
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    const int rest = 3 * (sh_coeff_count(sh_degree) - 1);
    for (int i = 0; i < rest; ++i) names.push_back("f_rest_" + std::to_string(i));
    names.push_back("opacity");
    for (int i = 0; i < 3; ++i) names.push_back("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) names.push_back("rot_" + std::to_string(i));
    return names;
}

void put_f32(std::string& out, double v) {
    const float f = static_cast<float>(v);
    char buf[4];
    std::memcpy(buf, &f, 4);  // host is little-endian (checked at load time below)
    out.append(buf, 4);
}

bool host_little_endian() {
    const std::uint16_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

} // namespace

PlyError::PlyError(Kind kind, std::uint64_t byte_offset, std::string element, const std::string& message)
    : std::runtime_error(std::string(kind_name(kind)) + " at byte " + std::to_string(byte_offset) +
                         (element.empty() ? std::string() : " (element '" + element + "')") + ": " + message),
      kind_(kind), offset_(byte_offset), element_(std::move(element)) {}

std::string encode_ply(const Scene& scene) {
    validate_scene(scene);
    if (scene.empty()) throw std::invalid_argument("write_ply: scene is empty");
    if (!host_little_endian()) throw std::runtime_error("big-endian hosts are not supported");

    const auto names = property_names(scene.sh_degree);
    std::string out;
    out += "ply\nformat binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(scene.size()) + "\n";
    for (const auto& n : names) out += "property float " + n + "\n";
    out += "end_header\n";

    const int coeffs = sh_coeff_count(scene.sh_degree);
    out.reserve(out.size() + scene.size() * names.size() * 4);
    for (const auto& p : scene.primitives) {
        for (int i = 0; i < 3; ++i) put_f32(out, p.position[i]);
        for (int i = 0; i < 3; ++i) put_f32(out, 0.0);
        for (int c = 0; c < 3; ++c) put_f32(out, p.sh(0, c));
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < coeffs; ++k) put_f32(out, p.sh(k, c));
        put_f32(out, p.opacity_logit);
        for (int i = 0; i < 3; ++i) put_f32(out, p.log_scale[i]);
        for (int i = 0; i < 4; ++i) put_f32(out, p.rotation[i]);
    }
    return out;
}

Scene decode_ply(const std::string& bytes) {
    using Kind = PlyError::Kind;
    if (bytes.empty() || bytes.compare(0, 4, "ply\n") != 0) {
        throw PlyError(Kind::MissingHeader, 0, "", "file does not start with 'ply'");
    }
    const auto header_end = bytes.find("end_header\n");
    if (header_end == std::string::npos) {
        throw PlyError(Kind::MissingHeader, bytes.size(), "", "no 'end_header' line");
    }
    const std::size_t payload_start = header_end + std::strlen("end_header\n");

    std::istringstream header(bytes.substr(0, header_end));
    std::string line;
    std::uint64_t offset = 0;
    std::string element;
    std::size_t vertex_count = 0;
    bool have_format = false;
    std::vector<std::string> props;
    while (std::getline(header, line)) {
        const std::uint64_t line_offset = offset;
        offset += line.size() + 1;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword.empty() || keyword == "ply" || keyword == "comment" || keyword == "obj_info") continue;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt != "binary_little_endian") {
                throw PlyError(Kind::UnsupportedFormat, line_offset, "", "format '" + fmt + "'");
            }
            have_format = true;
        } else if (keyword == "element") {
            std::string name;
            long long count = -1;
            ls >> name >> count;
            if (name.empty() || count < 0) {
                throw PlyError(Kind::MalformedHeader, line_offset, name, "bad element line '" + line + "'");
            }
            if (name != "vertex") {
                throw PlyError(Kind::UnknownLayout, line_offset, name, "only a vertex element is supported");
            }
            element = name;
            vertex_count = static_cast<std::size_t>(count);
        } else if (keyword == "property") {
            std::string type, name;
            ls >> type >> name;
            if (element.empty()) {
                throw PlyError(Kind::MalformedHeader, line_offset, "", "property before any element");
            }
            if (type == "list" || name.empty()) {
                throw PlyError(Kind::UnknownLayout, line_offset, element, "unsupported property '" + line + "'");
            }
            if (type != "float" && type != "float32") {
                throw PlyError(Kind::UnknownLayout, line_offset, element,
                               "property '" + name + "' has type '" + type + "', expected float");
            }
            props.push_back(name);
        } else {
            throw PlyError(Kind::MalformedHeader, line_offset, element, "unexpected keyword '" + keyword + "'");
        }
    }
    if (!have_format) throw PlyError(Kind::MalformedHeader, 0, "", "missing format line");
    if (element.empty()) throw PlyError(Kind::MalformedHeader, header_end, "", "missing vertex element");

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (!index.emplace(props[i], i).second) {
            throw PlyError(Kind::UnknownLayout, header_end, element, "duplicate property '" + props[i] + "'");
        }
    }
    const std::size_t rest = static_cast<std::size_t>(
        std::count_if(props.begin(), props.end(), [](const std::string& n) { return n.rfind("f_rest_", 0) == 0; }));
    int degree = -1;
    for (int d = 0; d <= kMaxShDegree; ++d) {
        if (rest == static_cast<std::size_t>(3 * (sh_coeff_count(d) - 1))) degree = d;
    }
    if (degree < 0) {
        throw PlyError(Kind::UnknownLayout, header_end, element,
                       std::to_string(rest) + " f_rest properties do not match any SH degree");
    }
    auto expected = property_names(degree);
    for (const auto& name : expected) {
        if (name[0] == 'n' && name.size() == 2) continue;  // normals are optional
        if (!index.count(name)) {
            throw PlyError(Kind::UnknownLayout, header_end, element, "missing property '" + name + "'");
        }
    }
    for (const auto& name : props) {
        if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
            throw PlyError(Kind::UnknownLayout, header_end, element, "unexpected property '" + name + "'");
        }
    }

    const std::size_t stride = props.size() * 4;
    const std::size_t need = vertex_count * stride;
    if (bytes.size() - payload_start < need) {
        throw PlyError(Kind::Truncated, bytes.size(), element,
                       "header declares " + std::to_string(vertex_count) + " vertices (" + std::to_string(need) +
                           " bytes) but only " + std::to_string(bytes.size() - payload_start) + " bytes follow");
    }
    if (bytes.size() - payload_start > need) {
        throw PlyError(Kind::MalformedHeader, payload_start + need, element, "trailing bytes after vertex data");
    }
    if (!host_little_endian()) throw std::runtime_error("big-endian hosts are not supported");

    Scene scene;
    scene.sh_degree = degree;
    scene.primitives.resize(vertex_count, make_primitive(degree));
    const int coeffs = sh_coeff_count(degree);
    const char* base = bytes.data() + payload_start;
    auto get = [&](std::size_t v, const std::string& name) {
        float f;
        std::memcpy(&f, base + v * stride + index.at(name) * 4, 4);
        return static_cast<double>(f);
    };
    for (std::size_t v = 0; v < vertex_count; ++v) {
        auto& p = scene.primitives[v];
        p.position = Vec3d(get(v, "x"), get(v, "y"), get(v, "z"));
        for (int c = 0; c < 3; ++c) p.sh(0, c) = get(v, "f_dc_" + std::to_string(c));
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < coeffs; ++k)
                p.sh(k, c) = get(v, "f_rest_" + std::to_string(c * (coeffs - 1) + (k - 1)));
        p.opacity_logit = get(v, "opacity");
        for (int i = 0; i < 3; ++i) p.log_scale[i] = get(v, "scale_" + std::to_string(i));
        for (int i = 0; i < 4; ++i) p.rotation[i] = get(v, "rot_" + std::to_string(i));
    }
    return scene;
}

void write_ply(const Scene& scene, const std::filesystem::path& path) {
    const std::string bytes = encode_ply(scene);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PlyError(PlyError::Kind::Io, 0, "", "cannot open '" + path.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw PlyError(PlyError::Kind::Io, 0, "", "write failed for '" + path.string() + "'");
}

Scene read_ply(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw PlyError(PlyError::Kind::Io, 0, "", "cannot open '" + path.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_ply(bytes);
}

} // namespace rgs
