#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vita/models.hpp"
#include "vita/quant.hpp"
#include "vita/tensor.hpp"

namespace vita {

// One encoder layer's parameters. Weight matrices are stored quantized; the
// float reference dequantizes them, so both paths share identical weights.
// Integer biases live in the accumulator scale of their matmul (filled in
// during calibration); the real-valued originals drive the float reference.
struct LayerWeights {
    QTensor wq, wk, wv;     // D×D, head i occupies columns [i·Dh, (i+1)·Dh)
    QTensor w_msa;          // D×D
    QTensor w_fc1;          // D×M
    QTensor w_fc2;          // M×D

    std::vector<double> bq_real, bk_real, bv_real, b_msa_real, b_fc1_real, b_fc2_real;
    std::vector<std::int32_t> bq, bk, bv, b_msa, b_fc1, b_fc2;

    std::vector<double> ln1_gamma, ln1_beta;
    std::vector<double> ln2_gamma, ln2_beta;
};

// Requantization scales for every op in one layer, fixed by calibration on
// the float reference and then frozen.
struct LayerScalePlan {
    double ln1_out = 1.0;
    double q_out = 1.0, k_out = 1.0, v_out = 1.0;
    double score_out = 1.0;
    double softmax_out = 1.0 / 127.0;
    double sa_out = 1.0;
    double proj_out = 1.0;
    double res1_out = 1.0;
    double ln2_out = 1.0;
    double fc1_out = 1.0;   // hidden pre-activation
    double gelu_out = 1.0;
    double fc2_out = 1.0;
    double res2_out = 1.0;
};

struct ModelWeights {
    ModelSpec model;
    std::vector<LayerWeights> layers;
    std::vector<LayerScalePlan> plan;   // same length as layers once calibrated
};

namespace detail {

inline std::uint32_t mix_seed(std::uint32_t seed, std::uint32_t tag) {
    std::uint32_t h = (seed + 0x9E3779B9u) * 2654435761u;
    h ^= (tag + 0x7F4A7C15u) * 2246822519u;
    h ^= h >> 15;
    return h;
}

// mt19937 output mapped straight to [-127, 127]; avoids distribution
// objects whose mapping is not pinned down across standard libraries.
inline std::int8_t draw_i8(std::mt19937& rng) {
    return static_cast<std::int8_t>(static_cast<std::int32_t>(rng() % 255u) - 127);
}

inline double draw_unit(std::mt19937& rng) {
    return static_cast<double>(rng() % 1000001u) / 1000000.0; // [0,1], 1e-6 steps
}

inline QTensor random_qtensor(std::vector<std::int64_t> dims, double scale,
                              std::uint32_t seed, std::uint32_t tag) {
    QTensor t = make_qtensor(std::move(dims), scale);
    std::mt19937 rng(mix_seed(seed, tag));
    for (auto& v : t.data) v = draw_i8(rng);
    return t;
}

inline std::vector<double> random_reals(std::int64_t n, double lo, double hi,
                                        std::uint32_t seed, std::uint32_t tag) {
    std::vector<double> v(static_cast<std::size_t>(n));
    std::mt19937 rng(mix_seed(seed, tag));
    for (auto& x : v) x = lo + (hi - lo) * draw_unit(rng);
    return v;
}

} // namespace detail

// Weight scale keeps dequantized weights in a well-conditioned range for
// D up to a few thousand (activations stay inside int8 after calibration).
inline double default_weight_scale(std::int64_t fan_in) {
    return 1.0 / (127.0 * std::sqrt(static_cast<double>(fan_in)));
}

// Deterministic random weights for a single-stage model. The scale plan is
// left empty; calibration (golden module) fills it plus the integer biases.
inline ModelWeights generate_weights(const ModelSpec& model, std::uint32_t seed) {
    model.validate();
    if (model.stages.size() != 1)
        throw ShapeError("generate_weights: single-stage models only");
    const StageSpec& st = model.stages[0];
    const std::int64_t D = st.latent_dim, M = st.mlp_hidden;

    ModelWeights mw;
    mw.model = model;
    const double ws_d = default_weight_scale(D);
    const double ws_m = default_weight_scale(M);
    for (std::int64_t l = 0; l < st.depth; ++l) {
        const auto lt = static_cast<std::uint32_t>(l * 100);
        LayerWeights w;
        w.wq = detail::random_qtensor({D, D}, ws_d, seed, lt + 1);
        w.wk = detail::random_qtensor({D, D}, ws_d, seed, lt + 2);
        w.wv = detail::random_qtensor({D, D}, ws_d, seed, lt + 3);
        w.w_msa = detail::random_qtensor({D, D}, ws_d, seed, lt + 4);
        w.w_fc1 = detail::random_qtensor({D, M}, ws_d, seed, lt + 5);
        w.w_fc2 = detail::random_qtensor({M, D}, ws_m, seed, lt + 6);
        w.bq_real = detail::random_reals(D, -0.05, 0.05, seed, lt + 7);
        w.bk_real = detail::random_reals(D, -0.05, 0.05, seed, lt + 8);
        w.bv_real = detail::random_reals(D, -0.05, 0.05, seed, lt + 9);
        w.b_msa_real = detail::random_reals(D, -0.05, 0.05, seed, lt + 10);
        w.b_fc1_real = detail::random_reals(M, -0.05, 0.05, seed, lt + 11);
        w.b_fc2_real = detail::random_reals(D, -0.05, 0.05, seed, lt + 12);
        w.ln1_gamma = detail::random_reals(D, 0.8, 1.2, seed, lt + 13);
        w.ln1_beta = detail::random_reals(D, -0.1, 0.1, seed, lt + 14);
        w.ln2_gamma = detail::random_reals(D, 0.8, 1.2, seed, lt + 15);
        w.ln2_beta = detail::random_reals(D, -0.1, 0.1, seed, lt + 16);
        mw.layers.push_back(std::move(w));
    }
    return mw;
}

// Deterministic random input activations, already quantized.
inline QTensor generate_input(std::int64_t n, std::int64_t d, std::uint32_t seed) {
    return detail::random_qtensor({n, d}, 1.0 / 64.0, seed, 0xA11CE);
}

// Column slice [c0, c1) of a quantized matrix.
inline QTensor slice_cols(const QTensor& t, std::int64_t c0, std::int64_t c1) {
    const std::int64_t n = t.rows(), m = t.cols();
    if (c0 < 0 || c1 > m || c0 >= c1) throw ShapeError("slice_cols: bad range");
    QTensor out = make_qtensor({n, c1 - c0}, t.scale);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = c0; j < c1; ++j)
            out.at(i, j - c0) = t.at(i, j);
    return out;
}

inline QTensor transpose(const QTensor& t) {
    QTensor out = make_qtensor({t.cols(), t.rows()}, t.scale);
    for (std::int64_t i = 0; i < t.rows(); ++i)
        for (std::int64_t j = 0; j < t.cols(); ++j)
            out.at(j, i) = t.at(i, j);
    return out;
}

} // namespace vita
