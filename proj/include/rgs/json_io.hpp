// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Thin helpers over nlohmann::json with strict key checking.
#pragma once

#include "rgs/core_math.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace rgs {

/// Validation failure in a user-supplied document; names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::ordered_json& doc, const std::filesystem::path& path);

/// Rejects keys of `obj` not in `allowed`.
void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed);

template <typename T>
T get_required(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + "." + key, "missing required field");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key, e.what());
    }
}

template <typename T>
void get_optional(const nlohmann::json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key, e.what());
    }
}

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != N) {
        throw ConfigError(where, "expected an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) {
        if (!j[i].is_number()) throw ConfigError(where, "expected numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

Mat3d mat3_from_json(const nlohmann::json& j, const std::string& where);

template <typename Derived>
nlohmann::ordered_json to_json_array(const Eigen::MatrixBase<Derived>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

nlohmann::ordered_json mat3_to_json(const Mat3d& m);

} // namespace rgs
