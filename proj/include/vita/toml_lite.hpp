#pragma once

// Minimal TOML subset used for model and accelerator config files:
// comments, bare/quoted keys, [table] and [[array-of-table]] headers,
// string/integer/float/boolean scalars and flat arrays. Intentionally not a
// general TOML implementation.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vita/errors.hpp"

namespace vita::toml {

struct Value {
    enum class Kind { string, integer, floating, boolean, array };
    Kind kind = Kind::string;
    std::string str;
    std::int64_t i = 0;
    double f = 0.0;
    bool b = false;
    std::vector<Value> arr;
};

struct Table {
    std::map<std::string, Value> values;
    std::map<std::string, Table> tables;
    std::map<std::string, std::vector<Table>> table_arrays;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::int64_t get_int(const std::string& key, std::int64_t def) const {
        auto it = values.find(key);
        if (it == values.end()) return def;
        if (it->second.kind == Value::Kind::integer) return it->second.i;
        if (it->second.kind == Value::Kind::floating) return static_cast<std::int64_t>(it->second.f);
        throw ParseError("toml: key '" + key + "' is not a number");
    }
    double get_float(const std::string& key, double def) const {
        auto it = values.find(key);
        if (it == values.end()) return def;
        if (it->second.kind == Value::Kind::integer) return static_cast<double>(it->second.i);
        if (it->second.kind == Value::Kind::floating) return it->second.f;
        throw ParseError("toml: key '" + key + "' is not a number");
    }
    bool get_bool(const std::string& key, bool def) const {
        auto it = values.find(key);
        if (it == values.end()) return def;
        if (it->second.kind != Value::Kind::boolean) throw ParseError("toml: key '" + key + "' is not a boolean");
        return it->second.b;
    }
    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values.find(key);
        if (it == values.end()) return def;
        if (it->second.kind != Value::Kind::string) throw ParseError("toml: key '" + key + "' is not a string");
        return it->second.str;
    }
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Remove a trailing comment that is not inside a quoted string.
inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        else if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline Value parse_scalar(const std::string& raw);

inline Value parse_array(const std::string& raw) {
    Value v;
    v.kind = Value::Kind::array;
    std::string inner = strip(raw.substr(1, raw.size() - 2));
    if (inner.empty()) return v;
    std::vector<std::string> parts;
    int depth = 0;
    bool in_str = false;
    std::string cur;
    for (char c : inner) {
        if (c == '"') in_str = !in_str;
        if (!in_str) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) { parts.push_back(cur); cur.clear(); continue; }
        }
        cur += c;
    }
    if (!strip(cur).empty()) parts.push_back(cur);
    for (auto& p : parts) v.arr.push_back(parse_scalar(strip(p)));
    return v;
}

inline Value parse_scalar(const std::string& raw) {
    Value v;
    if (raw.empty()) throw ParseError("toml: empty value");
    if (raw.front() == '[') {
        if (raw.back() != ']') throw ParseError("toml: unterminated array");
        return parse_array(raw);
    }
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') throw ParseError("toml: unterminated string");
        v.kind = Value::Kind::string;
        std::string out;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 2 < raw.size()) {
                ++i;
                switch (raw[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw ParseError("toml: unsupported escape");
                }
            } else {
                out += raw[i];
            }
        }
        v.str = out;
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = Value::Kind::boolean;
        v.b = (raw == "true");
        return v;
    }
    bool looks_float = raw.find('.') != std::string::npos ||
                       raw.find('e') != std::string::npos ||
                       raw.find('E') != std::string::npos;
    try {
        std::size_t pos = 0;
        if (looks_float) {
            v.kind = Value::Kind::floating;
            v.f = std::stod(raw, &pos);
        } else {
            v.kind = Value::Kind::integer;
            v.i = std::stoll(raw, &pos);
        }
        if (pos != raw.size()) throw ParseError("toml: trailing junk in value '" + raw + "'");
    } catch (const std::invalid_argument&) {
        throw ParseError("toml: cannot parse value '" + raw + "'");
    } catch (const std::out_of_range&) {
        throw ParseError("toml: value out of range '" + raw + "'");
    }
    return v;
}

inline std::vector<std::string> split_path(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '.') { parts.push_back(strip(cur)); cur.clear(); }
        else cur += c;
    }
    parts.push_back(strip(cur));
    for (auto& p : parts)
        if (p.empty()) throw ParseError("toml: empty path segment in [" + s + "]");
    return parts;
}

} // namespace detail

inline Table parse(std::istream& is) {
    Table root;
    Table* current = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = detail::strip(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            bool array_table = s.size() > 1 && s[1] == '[';
            std::size_t close = s.find(array_table ? "]]" : "]");
            if (close == std::string::npos)
                throw ParseError("toml: unterminated table header at line " + std::to_string(lineno));
            std::string path = s.substr(array_table ? 2 : 1, close - (array_table ? 2 : 1));
            auto parts = detail::split_path(path);
            Table* t = &root;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                bool last = (i + 1 == parts.size());
                if (last && array_table) {
                    t->table_arrays[parts[i]].emplace_back();
                    t = &t->table_arrays[parts[i]].back();
                } else if (!last && t->table_arrays.count(parts[i])) {
                    // nested table under the latest element of an array-of-tables
                    t = &t->table_arrays[parts[i]].back();
                } else {
                    t = &t->tables[parts[i]];
                }
            }
            current = t;
            continue;
        }
        std::size_t eq = std::string::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_str = !in_str;
            else if (s[i] == '=' && !in_str) { eq = i; break; }
        }
        if (eq == std::string::npos)
            throw ParseError("toml: expected key = value at line " + std::to_string(lineno));
        std::string key = detail::strip(s.substr(0, eq));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"')
            key = key.substr(1, key.size() - 2);
        if (key.empty()) throw ParseError("toml: empty key at line " + std::to_string(lineno));
        std::string val = detail::strip(s.substr(eq + 1));
        current->values[key] = detail::parse_scalar(val);
    }
    return root;
}

inline Table parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
}

inline Table parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open config file: " + path.string());
    return parse(is);
}

} // namespace vita::toml
