#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "vita/errors.hpp"
#include "vita/tensor.hpp"

namespace vita {

// Round half to even, independent of the FPU rounding mode.
// remainder(x, 1.0) returns x minus the nearest integer (ties to even),
// so subtracting it recovers that integer exactly.
inline double round_half_even(double x) {
    return x - std::remainder(x, 1.0);
}

inline std::int8_t clamp_i8(double v) {
    if (v > 127.0) return 127;
    if (v < -127.0) return -127;
    return static_cast<std::int8_t>(v);
}

inline std::int8_t quantize_value(double v, double scale) {
    if (!std::isfinite(v)) throw NumericError("quantize: non-finite input");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw NumericError("quantize: invalid scale");
    return clamp_i8(round_half_even(v / scale));
}

inline QTensor quantize(const FTensor& x, double scale) {
    QTensor q = make_qtensor(x.dims, scale);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        q.data[i] = quantize_value(x.data[i], scale);
    return q;
}

inline FTensor dequantize(const QTensor& q) {
    FTensor f = make_ftensor(q.dims);
    for (std::size_t i = 0; i < q.data.size(); ++i)
        f.data[i] = static_cast<double>(q.data[i]) * q.scale;
    return f;
}

// Symmetric max-abs calibration. All-zero input falls back to the epsilon
// floor so downstream scales stay positive.
inline double calibrate_scale(const std::vector<double>& values, double eps_floor = 1e-8) {
    if (values.empty()) throw NumericError("calibrate_scale: empty tensor");
    double m = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError("calibrate_scale: non-finite input");
        m = std::max(m, std::abs(v));
    }
    double s = m / 127.0;
    return s > eps_floor ? s : eps_floor;
}

inline double calibrate_scale(const FTensor& x, double eps_floor = 1e-8) {
    return calibrate_scale(x.data, eps_floor);
}

// Largest inner dimension for which m · 127² cannot overflow a 32-bit
// accumulator even with worst-case int8 operands.
inline constexpr std::int64_t kMaxInnerDim = std::int64_t(1) << 15;

inline std::int8_t requantize_acc(std::int64_t acc, double multiplier) {
    return clamp_i8(round_half_even(static_cast<double>(acc) * multiplier));
}

// Quantized matmul: exact integer accumulation, bias in accumulator scale,
// one rounding at the end. Accumulation order cannot change the result.
inline QTensor qmatmul(const QTensor& a, const QTensor& b,
                       const std::vector<std::int32_t>& bias, double out_scale) {
    const std::int64_t n = a.rows(), m = a.cols(), p = b.cols();
    if (b.rows() != m) throw ShapeError("qmatmul: inner dimensions differ");
    if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != p)
        throw ShapeError("qmatmul: bias length != output width");
    if (m > kMaxInnerDim) throw OverflowRiskError("qmatmul: inner dim exceeds 32-bit accumulator guarantee");
    if (!(out_scale > 0.0) || !std::isfinite(out_scale))
        throw NumericError("qmatmul: invalid out_scale");

    const double multiplier = a.scale * b.scale / out_scale;
    QTensor out = make_qtensor({n, p}, out_scale);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < p; ++j) {
            std::int64_t acc = bias.empty() ? 0 : bias[static_cast<std::size_t>(j)];
            for (std::int64_t k = 0; k < m; ++k)
                acc += static_cast<std::int64_t>(a.at(i, k)) * b.at(k, j);
            out.at(i, j) = requantize_acc(acc, multiplier);
        }
    }
    return out;
}

// Row-wise scaled softmax: dequantize, scale by inv_sqrt_dh, stabilize by
// max subtraction, normalize in doubles, requantize once.
inline QTensor softmax_rows(const QTensor& x, double inv_sqrt_dh, double out_scale = 1.0 / 127.0) {
    const std::int64_t n = x.rows(), m = x.cols();
    if (m < 1) throw ShapeError("softmax_rows: empty rows");
    QTensor out = make_qtensor({n, m}, out_scale);
    std::vector<double> row(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < m; ++j) {
            row[static_cast<std::size_t>(j)] =
                static_cast<double>(x.at(i, j)) * x.scale * inv_sqrt_dh;
            mx = std::max(mx, row[static_cast<std::size_t>(j)]);
        }
        double sum = 0.0;
        for (auto& v : row) { v = std::exp(v - mx); sum += v; }
        for (std::int64_t j = 0; j < m; ++j)
            out.at(i, j) = clamp_i8(round_half_even(row[static_cast<std::size_t>(j)] / sum / out_scale));
    }
    return out;
}

// Row-wise LayerNorm with population variance and epsilon 1e-5, computed in
// doubles, affine applied, requantized once.
inline QTensor layernorm_rows(const QTensor& x, const std::vector<double>& gamma,
                              const std::vector<double>& beta, double out_scale) {
    const std::int64_t n = x.rows(), m = x.cols();
    if (static_cast<std::int64_t>(gamma.size()) != m || static_cast<std::int64_t>(beta.size()) != m)
        throw ShapeError("layernorm_rows: affine vectors must match row width");
    constexpr double eps = 1e-5;
    QTensor out = make_qtensor({n, m}, out_scale);
    for (std::int64_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::int64_t j = 0; j < m; ++j) mean += static_cast<double>(x.at(i, j)) * x.scale;
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::int64_t j = 0; j < m; ++j) {
            double d = static_cast<double>(x.at(i, j)) * x.scale - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::int64_t j = 0; j < m; ++j) {
            double v = (static_cast<double>(x.at(i, j)) * x.scale - mean) * inv;
            v = v * gamma[static_cast<std::size_t>(j)] + beta[static_cast<std::size_t>(j)];
            out.at(i, j) = clamp_i8(round_half_even(v / out_scale));
        }
    }
    return out;
}

inline double gelu_real(double x) {
    constexpr double c = 0.7978845608028654; // sqrt(2/pi)
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

inline QTensor gelu(const QTensor& x, double out_scale) {
    QTensor out = make_qtensor(x.dims, out_scale);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = clamp_i8(round_half_even(
            gelu_real(static_cast<double>(x.data[i]) * x.scale) / out_scale));
    return out;
}

// Residual add: both addends brought to a common (real) scale, summed, one
// requantize. Shared by the reference and pipeline paths so they stay
// byte-identical.
inline QTensor residual_add(const QTensor& a, const QTensor& b, double out_scale) {
    if (a.dims != b.dims) throw ShapeError("residual_add: shape mismatch");
    QTensor out = make_qtensor(a.dims, out_scale);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double sum = static_cast<double>(a.data[i]) * a.scale +
                     static_cast<double>(b.data[i]) * b.scale;
        out.data[i] = clamp_i8(round_half_even(sum / out_scale));
    }
    return out;
}

} // namespace vita
