// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/json_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace rgs {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), "cannot open file");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string(), e.what());
    }
}

void write_json_file(const nlohmann::ordered_json& doc, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << doc.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected a JSON object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
    }
}

Mat3d mat3_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where, "expected a 3x3 array");
    Mat3d m;
    for (int r = 0; r < 3; ++r) m.row(r) = vec_from_json<3>(j[r], where).transpose();
    return m;
}

nlohmann::ordered_json mat3_to_json(const Mat3d& m) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (int r = 0; r < 3; ++r) a.push_back(to_json_array(m.row(r).transpose().eval()));
    return a;
}

} // namespace rgs
