#pragma once

#include <yaml-cpp/yaml.h>

#include <array>
#include <initializer_list>
#include <string>
#include <vector>

#include "tailsitter/config.hpp"

namespace tailsitter::yaml {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& what) { throw ConfigError(what, line_of(n)); }

/// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
inline void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!map.IsMap()) fail(map, where + ": expected a mapping");
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(kv.first, where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + ": expected a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, what + ": cannot parse '" + n.Scalar() + "'");
    }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& where) {
    if (const YAML::Node n = map[key]) out = scalar<T>(n, where + "." + key);
}

inline std::vector<double> numbers(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& v : n) out.push_back(scalar<double>(v, what));
    return out;
}

inline std::array<double, 3> triple(const YAML::Node& n, const std::string& what) {
    const auto v = numbers(n, what);
    if (v.size() != 3) fail(n, what + ": expected 3 values");
    return {v[0], v[1], v[2]};
}

/// "roll" | "pitch" | "yaw" or 0..2.
inline int axis(const YAML::Node& n, const std::string& what) {
    const std::string s = scalar<std::string>(n, what);
    if (s == "roll" || s == "0") return 0;
    if (s == "pitch" || s == "1") return 1;
    if (s == "yaw" || s == "2") return 2;
    fail(n, what + ": axis must be roll, pitch or yaw");
}

inline YAML::Node parse(const std::string& text, const std::string& source) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ": " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
    }
}

}  // namespace tailsitter::yaml

namespace tailsitter {

ControllerConfig read_controller_node(const YAML::Node& root, const ControllerConfig& base);
PlantFitParams read_plant_node(const YAML::Node& root, const PlantFitParams& base);

}  // namespace tailsitter
