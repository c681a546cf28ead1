#pragma once

// Reference encoder execution: every op computed in the plain order of the
// math, fully materialized, no scheduling. This is the correctness oracle
// the pipelined path must match byte for byte. A float twin of the same
// block structure provides calibration statistics and the fidelity baseline.

#include <cmath>
#include <cstdint>
#include <vector>

#include "vita/quant.hpp"
#include "vita/tensor.hpp"
#include "vita/weights.hpp"

namespace vita {

// ---------------------------------------------------------------------------
// Float reference (double precision throughout).

namespace fref {

inline FTensor matmul(const FTensor& a, const FTensor& b, const std::vector<double>& bias) {
    const std::int64_t n = a.rows(), m = a.cols(), p = b.cols();
    if (b.rows() != m) throw ShapeError("float matmul: inner dims differ");
    FTensor out = make_ftensor({n, p});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < p; ++j) {
            double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(j)];
            for (std::int64_t k = 0; k < m; ++k) acc += a.at(i, k) * b.at(k, j);
            out.at(i, j) = acc;
        }
    return out;
}

inline FTensor transpose(const FTensor& t) {
    FTensor out = make_ftensor({t.cols(), t.rows()});
    for (std::int64_t i = 0; i < t.rows(); ++i)
        for (std::int64_t j = 0; j < t.cols(); ++j) out.at(j, i) = t.at(i, j);
    return out;
}

inline FTensor slice_cols(const FTensor& t, std::int64_t c0, std::int64_t c1) {
    FTensor out = make_ftensor({t.rows(), c1 - c0});
    for (std::int64_t i = 0; i < t.rows(); ++i)
        for (std::int64_t j = c0; j < c1; ++j) out.at(i, j - c0) = t.at(i, j);
    return out;
}

inline std::vector<double> slice(const std::vector<double>& v, std::int64_t c0, std::int64_t c1) {
    return std::vector<double>(v.begin() + c0, v.begin() + c1);
}

inline FTensor softmax_rows(const FTensor& x, double inv_sqrt_dh) {
    FTensor out = make_ftensor(x.dims);
    const std::int64_t n = x.rows(), m = x.cols();
    for (std::int64_t i = 0; i < n; ++i) {
        double mx = -1e300;
        for (std::int64_t j = 0; j < m; ++j) mx = std::max(mx, x.at(i, j) * inv_sqrt_dh);
        double sum = 0.0;
        for (std::int64_t j = 0; j < m; ++j) {
            double e = std::exp(x.at(i, j) * inv_sqrt_dh - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::int64_t j = 0; j < m; ++j) out.at(i, j) /= sum;
    }
    return out;
}

inline FTensor layernorm_rows(const FTensor& x, const std::vector<double>& gamma,
                              const std::vector<double>& beta) {
    constexpr double eps = 1e-5;
    const std::int64_t n = x.rows(), m = x.cols();
    FTensor out = make_ftensor(x.dims);
    for (std::int64_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::int64_t j = 0; j < m; ++j) mean += x.at(i, j);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::int64_t j = 0; j < m; ++j) {
            double d = x.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        double inv = 1.0 / std::sqrt(var + eps);
        for (std::int64_t j = 0; j < m; ++j)
            out.at(i, j) = (x.at(i, j) - mean) * inv * gamma[static_cast<std::size_t>(j)] +
                           beta[static_cast<std::size_t>(j)];
    }
    return out;
}

inline FTensor add(const FTensor& a, const FTensor& b) {
    FTensor out = make_ftensor(a.dims);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

inline FTensor gelu(const FTensor& x) {
    FTensor out = make_ftensor(x.dims);
    for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = gelu_real(x.data[i]);
    return out;
}

} // namespace fref

// Float intermediates of one layer, exposed so calibration can observe them.
struct FloatLayerTrace {
    FTensor ln1, q, k, v, score, softmax, sa, proj, res1, ln2, fc1, gelu_out, fc2, res2;
};

inline FloatLayerTrace float_layer(const FTensor& z, const LayerWeights& w,
                                   std::int64_t heads) {
    const std::int64_t D = z.cols();
    const std::int64_t Dh = D / heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(Dh));

    FloatLayerTrace t;
    t.ln1 = fref::layernorm_rows(z, w.ln1_gamma, w.ln1_beta);
    FTensor wq = dequantize(w.wq), wk = dequantize(w.wk), wv = dequantize(w.wv);
    t.q = fref::matmul(t.ln1, wq, w.bq_real);
    t.k = fref::matmul(t.ln1, wk, w.bk_real);
    t.v = fref::matmul(t.ln1, wv, w.bv_real);

    const std::int64_t N = z.rows();
    t.score = make_ftensor({heads * N, N});
    t.softmax = make_ftensor({heads * N, N});
    t.sa = make_ftensor({N, D});
    for (std::int64_t h = 0; h < heads; ++h) {
        FTensor qh = fref::slice_cols(t.q, h * Dh, (h + 1) * Dh);
        FTensor kh = fref::slice_cols(t.k, h * Dh, (h + 1) * Dh);
        FTensor vh = fref::slice_cols(t.v, h * Dh, (h + 1) * Dh);
        FTensor sc = fref::matmul(qh, fref::transpose(kh), {});
        FTensor sm = fref::softmax_rows(sc, inv_sqrt_dh);
        FTensor sa = fref::matmul(sm, vh, {});
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < N; ++j) {
                t.score.at(h * N + i, j) = sc.at(i, j);
                t.softmax.at(h * N + i, j) = sm.at(i, j);
            }
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < Dh; ++j) t.sa.at(i, h * Dh + j) = sa.at(i, j);
    }
    t.proj = fref::matmul(t.sa, dequantize(w.w_msa), w.b_msa_real);
    t.res1 = fref::add(z, t.proj);
    t.ln2 = fref::layernorm_rows(t.res1, w.ln2_gamma, w.ln2_beta);
    t.fc1 = fref::matmul(t.ln2, dequantize(w.w_fc1), w.b_fc1_real);
    t.gelu_out = fref::gelu(t.fc1);
    t.fc2 = fref::matmul(t.gelu_out, dequantize(w.w_fc2), w.b_fc2_real);
    t.res2 = fref::add(t.res1, t.fc2);
    return t;
}

inline FTensor float_model(const FTensor& input, const ModelWeights& mw) {
    const std::int64_t heads = mw.model.stages[0].heads;
    FTensor z = input;
    for (const auto& w : mw.layers) z = float_layer(z, w, heads).res2;
    return z;
}

// ---------------------------------------------------------------------------
// Calibration: one float forward pass fixes every requantization scale
// (max-abs rule) and converts real biases into accumulator-scale integers.

inline std::vector<std::int32_t> bias_to_acc(const std::vector<double>& b_real,
                                             double in_scale, double w_scale) {
    std::vector<std::int32_t> out(b_real.size());
    for (std::size_t i = 0; i < b_real.size(); ++i)
        out[i] = static_cast<std::int32_t>(round_half_even(b_real[i] / (in_scale * w_scale)));
    return out;
}

inline void calibrate_plan(ModelWeights& mw, const QTensor& input) {
    FTensor z = dequantize(input);
    mw.plan.clear();
    for (auto& w : mw.layers) {
        const std::int64_t heads = mw.model.stages[0].heads;
        FloatLayerTrace t = float_layer(z, w, heads);
        LayerScalePlan p;
        p.ln1_out = calibrate_scale(t.ln1);
        p.q_out = calibrate_scale(t.q);
        p.k_out = calibrate_scale(t.k);
        p.v_out = calibrate_scale(t.v);
        p.score_out = calibrate_scale(t.score);
        p.softmax_out = 1.0 / 127.0;
        p.sa_out = calibrate_scale(t.sa);
        p.proj_out = calibrate_scale(t.proj);
        p.res1_out = calibrate_scale(t.res1);
        p.ln2_out = calibrate_scale(t.ln2);
        p.fc1_out = calibrate_scale(t.fc1);
        p.gelu_out = calibrate_scale(t.gelu_out);
        p.fc2_out = calibrate_scale(t.fc2);
        p.res2_out = calibrate_scale(t.res2);

        w.bq = bias_to_acc(w.bq_real, p.ln1_out, w.wq.scale);
        w.bk = bias_to_acc(w.bk_real, p.ln1_out, w.wk.scale);
        w.bv = bias_to_acc(w.bv_real, p.ln1_out, w.wv.scale);
        w.b_msa = bias_to_acc(w.b_msa_real, p.sa_out, w.w_msa.scale);
        w.b_fc1 = bias_to_acc(w.b_fc1_real, p.ln2_out, w.w_fc1.scale);
        w.b_fc2 = bias_to_acc(w.b_fc2_real, p.gelu_out, w.w_fc2.scale);

        mw.plan.push_back(p);
        z = t.res2;
    }
}

// Convenience: seeded weights + input + frozen calibration in one call.
struct TestModel {
    ModelWeights weights;
    QTensor input;
};

inline TestModel make_test_model(const ModelSpec& model, std::int64_t tokens,
                                 std::uint32_t seed) {
    TestModel tm;
    tm.weights = generate_weights(model, seed);
    tm.input = generate_input(tokens, model.stages[0].latent_dim, seed);
    calibrate_plan(tm.weights, tm.input);
    return tm;
}

// ---------------------------------------------------------------------------
// Quantized reference.

inline QTensor golden_msa(const QTensor& z_ln, const LayerWeights& w,
                          const LayerScalePlan& p, std::int64_t heads) {
    const std::int64_t N = z_ln.rows(), D = z_ln.cols();
    if (w.wq.rows() != D) throw ShapeError("golden_msa: weight shape mismatch");
    const std::int64_t Dh = D / heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(Dh));

    QTensor q = qmatmul(z_ln, w.wq, w.bq, p.q_out);
    QTensor k = qmatmul(z_ln, w.wk, w.bk, p.k_out);
    QTensor v = qmatmul(z_ln, w.wv, w.bv, p.v_out);

    QTensor sa = make_qtensor({N, D}, p.sa_out);
    for (std::int64_t h = 0; h < heads; ++h) {
        QTensor qh = slice_cols(q, h * Dh, (h + 1) * Dh);
        QTensor kh = slice_cols(k, h * Dh, (h + 1) * Dh);
        QTensor vh = slice_cols(v, h * Dh, (h + 1) * Dh);
        QTensor sc = qmatmul(qh, transpose(kh), {}, p.score_out);
        QTensor sm = softmax_rows(sc, inv_sqrt_dh, p.softmax_out);
        QTensor sah = qmatmul(sm, vh, {}, p.sa_out);
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = 0; j < Dh; ++j) sa.at(i, h * Dh + j) = sah.at(i, j);
    }
    return qmatmul(sa, w.w_msa, w.b_msa, p.proj_out);
}

inline QTensor golden_mlp(const QTensor& z_ln, const LayerWeights& w, const LayerScalePlan& p) {
    QTensor hidden = qmatmul(z_ln, w.w_fc1, w.b_fc1, p.fc1_out);
    QTensor act = gelu(hidden, p.gelu_out);
    return qmatmul(act, w.w_fc2, w.b_fc2, p.fc2_out);
}

inline QTensor golden_layer(const QTensor& z, const LayerWeights& w, const LayerScalePlan& p,
                            std::int64_t heads) {
    QTensor ln1 = layernorm_rows(z, w.ln1_gamma, w.ln1_beta, p.ln1_out);
    QTensor msa = golden_msa(ln1, w, p, heads);
    QTensor res1 = residual_add(z, msa, p.res1_out);
    QTensor ln2 = layernorm_rows(res1, w.ln2_gamma, w.ln2_beta, p.ln2_out);
    QTensor mlp = golden_mlp(ln2, w, p);
    return residual_add(res1, mlp, p.res2_out);
}

inline QTensor golden_model(const QTensor& input, const ModelWeights& mw) {
    if (mw.plan.size() != mw.layers.size())
        throw Error("golden_model: weights are not calibrated");
    const std::int64_t heads = mw.model.stages[0].heads;
    QTensor z = input;
    for (std::size_t l = 0; l < mw.layers.size(); ++l)
        z = golden_layer(z, mw.layers[l], mw.plan[l], heads);
    return z;
}

// Cosine similarity between the float reference and a dequantized int8
// result; the toy-scale fidelity metric.
inline double cosine_similarity(const FTensor& a, const QTensor& b) {
    if (a.elem_count() != b.elem_count()) throw ShapeError("cosine: size mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double x = a.data[i];
        double y = static_cast<double>(b.data[i]) * b.scale;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace vita
