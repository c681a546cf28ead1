#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

#include "vita/errors.hpp"

namespace vita {

// Ceiling division for non-negative integers. Denominator must be positive.
constexpr std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
    return (num + den - 1) / den;
}

// Round a×b up to the next multiple-free ratio: cycles to stream `elems`
// items through a unit that consumes `per_cycle` items per cycle.
constexpr std::int64_t stream_cycles(std::int64_t elems, std::int64_t per_cycle) {
    return ceil_div(elems, per_cycle);
}

inline std::optional<std::string> env_string(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

inline std::optional<long> env_long(const char* name) {
    auto s = env_string(name);
    if (!s) return std::nullopt;
    char* end = nullptr;
    long v = std::strtol(s->c_str(), &end, 10);
    if (end == s->c_str() || *end != '\0') return std::nullopt;
    return v;
}

// True when the named environment variable is set to a truthy value.
inline bool env_flag(const char* name) {
    auto s = env_string(name);
    if (!s) return false;
    return *s != "0" && *s != "" && *s != "false" && *s != "off";
}

} // namespace vita
