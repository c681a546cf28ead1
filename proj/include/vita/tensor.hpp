#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "vita/errors.hpp"

namespace vita {

// Quantized tensor: row-major int8 payload plus one symmetric scale.
// Real value of element i is scale * int8_data[i]; zero point is always 0.
struct QTensor {
    std::vector<std::int64_t> dims;
    double scale = 1.0;
    std::vector<std::int8_t> data;

    std::int64_t elem_count() const {
        std::int64_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
    std::int64_t rows() const { return dims.empty() ? 0 : dims[0]; }
    std::int64_t cols() const {
        if (dims.empty()) return 0;
        std::int64_t c = 1;
        for (std::size_t i = 1; i < dims.size(); ++i) c *= dims[i];
        return c;
    }
    std::int8_t at(std::int64_t r, std::int64_t c) const { return data[r * cols() + c]; }
    std::int8_t& at(std::int64_t r, std::int64_t c) { return data[r * cols() + c]; }
};

// Dense float matrix used by the reference (unquantized) path.
struct FTensor {
    std::vector<std::int64_t> dims;
    std::vector<double> data;

    std::int64_t elem_count() const {
        std::int64_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
    std::int64_t rows() const { return dims.empty() ? 0 : dims[0]; }
    std::int64_t cols() const {
        if (dims.empty()) return 0;
        std::int64_t c = 1;
        for (std::size_t i = 1; i < dims.size(); ++i) c *= dims[i];
        return c;
    }
    double at(std::int64_t r, std::int64_t c) const { return data[r * cols() + c]; }
    double& at(std::int64_t r, std::int64_t c) { return data[r * cols() + c]; }
};

inline FTensor make_ftensor(std::vector<std::int64_t> dims) {
    FTensor t;
    t.dims = std::move(dims);
    t.data.assign(static_cast<std::size_t>(t.elem_count()), 0.0);
    return t;
}

inline QTensor make_qtensor(std::vector<std::int64_t> dims, double scale) {
    QTensor t;
    t.dims = std::move(dims);
    t.scale = scale;
    t.data.assign(static_cast<std::size_t>(t.elem_count()), 0);
    return t;
}

namespace detail {

template <typename T>
void write_le(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw ParseError("tensor blob truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace detail

// Binary layout (little endian): magic "VQT1", rank u32, dims u32[rank],
// scale f64, payload int8[prod(dims)].
inline void save_qtensor(const QTensor& t, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for write: " + path.string());
    os.write("VQT1", 4);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    detail::write_le<double>(os, t.scale);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size()));
    if (!os) throw Error("write failed: " + path.string());
}

inline QTensor load_qtensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open for read: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "VQT1", 4) != 0)
        throw ParseError("bad tensor magic in " + path.string());
    auto rank = detail::read_le<std::uint32_t>(is);
    if (rank > 8) throw ParseError("implausible tensor rank in " + path.string());
    QTensor t;
    for (std::uint32_t i = 0; i < rank; ++i)
        t.dims.push_back(detail::read_le<std::uint32_t>(is));
    t.scale = detail::read_le<double>(is);
    if (t.scale <= 0.0) throw ParseError("non-positive scale in " + path.string());
    auto n = t.elem_count();
    t.data.resize(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(n));
    if (!is) throw ParseError("tensor payload truncated in " + path.string());
    return t;
}

} // namespace vita
