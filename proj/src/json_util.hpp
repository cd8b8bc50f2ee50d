#pragma once

#include <json.hpp>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <initializer_list>
#include <string>

#include "synthact/errors.hpp"

// Strict JSON helpers shared by the file-format loaders. All loaders reject
// unknown fields and report errors with a dotted field path.

namespace synthact::jsonutil {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object())
        throw ValidationError(path + ": expected an object");
}

inline void expect_keys(const json& j, std::initializer_list<const char*> keys,
                        const std::string& path) {
    expect_object(j, path);
    for (const char* k : keys) {
        if (!j.contains(k))
            throw ValidationError(path + ": missing field \"" + k + "\"");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known)
            throw ValidationError(path + ": unknown field \"" + it.key() + "\"");
    }
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number())
        throw ValidationError(path + ": expected a number");
    return j.get<double>();
}

inline std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string())
        throw ValidationError(path + ": expected a string");
    return j.get<std::string>();
}

inline Eigen::Vector3d get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError(path + ": expected an array of 3 numbers");
    return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"),
            get_number(j[2], path + "[2]")};
}

inline Eigen::Vector2d get_vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw ValidationError(path + ": expected an array of 2 numbers");
    return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

// Reads a (w,x,y,z) quaternion. Inputs within 1e-3 of unit norm are
// renormalized; anything further off is rejected as corrupt.
inline Eigen::Quaterniond get_unit_quat(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4)
        throw ValidationError(path + ": expected an array of 4 numbers");
    Eigen::Quaterniond q(get_number(j[0], path + "[0]"),
                         get_number(j[1], path + "[1]"),
                         get_number(j[2], path + "[2]"),
                         get_number(j[3], path + "[3]"));
    double n = q.norm();
    if (std::abs(n - 1.0) > 1e-3)
        throw ValidationError(path + ": quaternion norm " + std::to_string(n) +
                              " is not within 1e-3 of unit");
    q.normalize();
    return q;
}

inline void expect_version(const json& j, const std::string& path) {
    const json& v = j.at("version");
    if (!v.is_number_integer() || v.get<int>() != 1)
        throw ValidationError(path + ".version: expected 1");
}

inline json parse(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ValidationError(what + ": malformed JSON");
    return j;
}

json load_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const json& j);

inline json vec3_to_json(const Eigen::Vector3d& v) {
    return json::array({v.x(), v.y(), v.z()});
}

inline json quat_to_json(const Eigen::Quaterniond& q) {
    return json::array({q.w(), q.x(), q.y(), q.z()});
}

}  // namespace synthact::jsonutil
