#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "vita/errors.hpp"
#include "vita/models.hpp"
#include "vita/util.hpp"

namespace vita {

enum class OpKind {
    patch_embed,   // zero-cost marker: embedding conv is outside the costed scope
    layernorm,
    qkv_proj,
    attn_score,
    attn_softmax,
    attn_apply,
    msa_proj,
    residual,
    mlp_fc1,
    mlp_fc2,
    patch_merge,
};

inline const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::patch_embed: return "PATCH_EMBED";
        case OpKind::layernorm: return "LAYERNORM";
        case OpKind::qkv_proj: return "QKV_PROJ";
        case OpKind::attn_score: return "ATTN_SCORE";
        case OpKind::attn_softmax: return "ATTN_SOFTMAX";
        case OpKind::attn_apply: return "ATTN_APPLY";
        case OpKind::msa_proj: return "MSA_PROJ";
        case OpKind::residual: return "RESIDUAL";
        case OpKind::mlp_fc1: return "MLP_FC1";
        case OpKind::mlp_fc2: return "MLP_FC2";
        case OpKind::patch_merge: return "PATCH_MERGE";
    }
    return "?";
}

struct LayerOp {
    OpKind kind = OpKind::layernorm;
    std::int64_t stage = 0;
    std::int64_t layer = -1;          // global encoder-layer index; -1 for inter-stage ops
    std::int64_t rows = 0;            // output rows (per window for windowed attention)
    std::int64_t inner = 0;           // contraction length
    std::int64_t outer = 0;           // output columns
    std::int64_t heads = 1;
    std::int64_t window_count = 1;
    bool windowed = false;            // attention restricted to local windows
    std::int64_t mac_count = 0;       // useful MACs only
    std::int64_t overhead_mac_count = 0; // window-padding MACs (computed then discarded)
    std::int64_t weight_bytes = 0;
    std::int64_t activation_bytes = 0;
};

// Resolved per-stage geometry after patch embedding / merging.
struct StageShape {
    std::int64_t grid_h = 0;
    std::int64_t grid_w = 0;
    std::int64_t tokens = 0;       // N for this stage (class token included if enabled)
    std::int64_t latent_dim = 0;   // D
    std::int64_t heads = 0;        // k
    std::int64_t head_dim = 0;     // Dh
    std::int64_t mlp_hidden = 0;   // M
    std::int64_t depth = 0;        // L
    std::int64_t window = 0;       // 0 = global
    std::int64_t window_count = 1;
    std::int64_t attn_tokens = 0;  // N' = tokens per attention instance
};

struct Workload {
    ModelSpec model;
    ImageDims image;
    std::vector<StageShape> stages;
    std::vector<LayerOp> ops;

    std::int64_t total_macs() const {
        std::int64_t t = 0;
        for (const auto& op : ops) t += op.mac_count;
        return t;
    }
    std::int64_t total_weight_bytes() const {
        std::int64_t t = 0;
        for (const auto& op : ops) t += op.weight_bytes;
        return t;
    }
};

inline std::int64_t padded_tokens(std::int64_t n, std::int64_t tile) {
    return ceil_div(n, tile) * tile;
}

inline Workload build_workload(const ModelSpec& model, const ImageDims& image) {
    model.validate();
    if (image.height <= 0 || image.width <= 0 || image.channels <= 0)
        throw ShapeError("image dims must be positive");
    if (image.height % model.patch_size != 0 || image.width % model.patch_size != 0)
        throw ShapeError("image dims must be divisible by patch size " +
                         std::to_string(model.patch_size));

    Workload w;
    w.model = model;
    w.image = image;

    std::int64_t gh = image.height / model.patch_size;
    std::int64_t gw = image.width / model.patch_size;
    std::int64_t prev_dim = 0;
    std::int64_t prev_tokens = 0;
    std::int64_t global_layer = 0;

    for (std::size_t si = 0; si < model.stages.size(); ++si) {
        const StageSpec& st = model.stages[si];

        if (st.patch_merge_in) {
            if (si == 0) throw ShapeError("first stage cannot begin with patch merging");
            if (gh % 2 != 0 || gw % 2 != 0)
                throw ShapeError("patch merging requires an even token grid");
            gh /= 2;
            gw /= 2;
            LayerOp op;
            op.kind = OpKind::patch_merge;
            op.stage = static_cast<std::int64_t>(si);
            op.rows = gh * gw;
            op.inner = 4 * prev_dim;
            op.outer = st.latent_dim;
            op.mac_count = op.rows * op.inner * op.outer;
            op.weight_bytes = op.inner * op.outer;
            op.activation_bytes = prev_tokens * prev_dim + op.rows * op.outer;
            w.ops.push_back(op);
        }

        StageShape shape;
        shape.grid_h = gh;
        shape.grid_w = gw;
        shape.latent_dim = st.latent_dim;
        shape.heads = st.heads;
        shape.head_dim = st.head_dim();
        shape.mlp_hidden = st.mlp_hidden;
        shape.depth = st.depth;
        shape.window = st.window;
        shape.tokens = gh * gw;
        // The sequence-length formula has no class-token term; the flag adds
        // one token for global-attention stages (windows cannot host it).
        if (model.include_class_token && st.window == 0) shape.tokens += 1;

        std::int64_t wh = 1, ww = 1;
        if (st.window > 0) {
            wh = ceil_div(gh, st.window);
            ww = ceil_div(gw, st.window);
            shape.window_count = wh * ww;
            shape.attn_tokens = st.window * st.window;
        } else {
            shape.window_count = 1;
            shape.attn_tokens = shape.tokens;
        }

        if (si == 0) {
            LayerOp op;
            op.kind = OpKind::patch_embed;
            op.stage = 0;
            op.rows = gh * gw;
            op.inner = model.patch_size * model.patch_size * image.channels;
            op.outer = st.latent_dim;
            op.mac_count = 0; // excluded from the costed scope; marker only
            op.activation_bytes = image.height * image.width * image.channels +
                                  op.rows * op.outer;
            w.ops.push_back(op);
        }

        const std::int64_t N = shape.tokens;
        const std::int64_t D = shape.latent_dim;
        const std::int64_t k = shape.heads;
        const std::int64_t Dh = shape.head_dim;
        const std::int64_t M = shape.mlp_hidden;
        const std::int64_t Np = shape.attn_tokens;

        // Exact useful token count per window tile (boundary tiles of a padded
        // grid hold fewer real tokens; their padding MACs are overhead).
        std::int64_t useful_sq_sum = 0;
        if (st.window > 0) {
            for (std::int64_t r = 0; r < wh; ++r) {
                for (std::int64_t c = 0; c < ww; ++c) {
                    std::int64_t rr = std::min(st.window, gh - r * st.window);
                    std::int64_t cc = std::min(st.window, gw - c * st.window);
                    std::int64_t real = rr * cc;
                    useful_sq_sum += real * real;
                }
            }
        } else {
            useful_sq_sum = N * N;
        }
        const std::int64_t attn_total = shape.window_count * Np * Np * k * Dh;
        const std::int64_t attn_useful = useful_sq_sum * k * Dh;

        for (std::int64_t l = 0; l < st.depth; ++l, ++global_layer) {
            auto push = [&](LayerOp op) {
                op.stage = static_cast<std::int64_t>(si);
                op.layer = global_layer;
                w.ops.push_back(op);
            };

            LayerOp ln1;
            ln1.kind = OpKind::layernorm;
            ln1.rows = N;
            ln1.outer = D;
            ln1.activation_bytes = 2 * N * D;
            push(ln1);

            LayerOp qkv;
            qkv.kind = OpKind::qkv_proj;
            qkv.rows = N;
            qkv.inner = D;
            qkv.outer = 3 * Dh;
            qkv.heads = k;
            qkv.mac_count = 3 * N * D * Dh * k;
            qkv.weight_bytes = 3 * D * Dh * k;
            qkv.activation_bytes = N * D + 3 * N * D;
            push(qkv);

            LayerOp score;
            score.kind = OpKind::attn_score;
            score.rows = Np;
            score.inner = Dh;
            score.outer = Np;
            score.heads = k;
            score.window_count = shape.window_count;
            score.windowed = st.window > 0;
            score.mac_count = attn_useful;
            score.overhead_mac_count = attn_total - attn_useful;
            score.activation_bytes = 2 * N * D + shape.window_count * k * Np * Np;
            push(score);

            LayerOp sm;
            sm.kind = OpKind::attn_softmax;
            sm.rows = shape.window_count * k * Np;
            sm.outer = Np;
            sm.window_count = shape.window_count;
            sm.windowed = st.window > 0;
            sm.activation_bytes = 2 * shape.window_count * k * Np * Np;
            push(sm);

            LayerOp apply;
            apply.kind = OpKind::attn_apply;
            apply.rows = Np;
            apply.inner = Np;
            apply.outer = Dh;
            apply.heads = k;
            apply.window_count = shape.window_count;
            apply.windowed = st.window > 0;
            apply.mac_count = attn_useful;
            apply.overhead_mac_count = attn_total - attn_useful;
            apply.activation_bytes = shape.window_count * k * Np * Np + 2 * N * D;
            push(apply);

            LayerOp proj;
            proj.kind = OpKind::msa_proj;
            proj.rows = N;
            proj.inner = D;
            proj.outer = D;
            proj.mac_count = N * D * D;
            proj.weight_bytes = D * D;
            proj.activation_bytes = 2 * N * D;
            push(proj);

            LayerOp res1;
            res1.kind = OpKind::residual;
            res1.rows = N;
            res1.outer = D;
            res1.activation_bytes = 3 * N * D;
            push(res1);

            LayerOp ln2 = ln1;
            push(ln2);

            LayerOp fc1;
            fc1.kind = OpKind::mlp_fc1;
            fc1.rows = N;
            fc1.inner = D;
            fc1.outer = M;
            fc1.mac_count = N * D * M;
            fc1.weight_bytes = D * M;
            fc1.activation_bytes = N * D + N * M;
            push(fc1);

            LayerOp fc2;
            fc2.kind = OpKind::mlp_fc2;
            fc2.rows = N;
            fc2.inner = M;
            fc2.outer = D;
            fc2.mac_count = N * M * D;
            fc2.weight_bytes = M * D;
            fc2.activation_bytes = N * M + N * D;
            push(fc2);

            LayerOp res2 = res1;
            push(res2);
        }

        w.stages.push_back(shape);
        prev_dim = st.latent_dim;
        prev_tokens = shape.tokens;
    }
    return w;
}

// MAC accounting buckets matching the published breakdown convention:
// window-local score/apply matmuls are outside the breakdown scope (their
// MACs still count toward the workload total and HUE), patch embedding is
// always outside. Fractions are exact rationals over the bucketed sum.
struct MacBreakdown {
    std::int64_t msa_macs = 0;
    std::int64_t mlp_macs = 0;
    std::int64_t patch_merge_macs = 0;

    std::int64_t denominator() const { return msa_macs + mlp_macs + patch_merge_macs; }
    double msa_fraction() const { return static_cast<double>(msa_macs) / static_cast<double>(denominator()); }
    double mlp_fraction() const { return static_cast<double>(mlp_macs) / static_cast<double>(denominator()); }
    double patch_merge_fraction() const {
        return static_cast<double>(patch_merge_macs) / static_cast<double>(denominator());
    }
};

inline MacBreakdown mac_breakdown(const Workload& w) {
    if (w.ops.empty()) throw EmptyWorkloadError("mac_breakdown: empty workload");
    MacBreakdown b;
    for (const auto& op : w.ops) {
        switch (op.kind) {
            case OpKind::qkv_proj:
            case OpKind::msa_proj:
                b.msa_macs += op.mac_count;
                break;
            case OpKind::attn_score:
            case OpKind::attn_apply:
                if (!op.windowed) b.msa_macs += op.mac_count;
                break;
            case OpKind::mlp_fc1:
            case OpKind::mlp_fc2:
                b.mlp_macs += op.mac_count;
                break;
            case OpKind::patch_merge:
                b.patch_merge_macs += op.mac_count;
                break;
            default:
                break;
        }
    }
    if (b.denominator() == 0)
        throw EmptyWorkloadError("mac_breakdown: workload has no MAC-bearing operations");
    return b;
}

// Single-layer int8 storage sizes for the first stage, in bytes.
struct MemoryFootprint {
    std::int64_t input_bytes = 0;
    std::int64_t wq_bytes = 0;
    std::int64_t wk_bytes = 0;
    std::int64_t wv_bytes = 0;
    std::int64_t w_msa_bytes = 0;
    std::int64_t w_fc1_bytes = 0;
    std::int64_t w_fc2_bytes = 0;
};

inline MemoryFootprint memory_footprint(const ModelSpec& model, const ImageDims& image) {
    Workload w = build_workload(model, image);
    const StageShape& s0 = w.stages.front();
    MemoryFootprint f;
    f.input_bytes = s0.tokens * s0.latent_dim;
    f.wq_bytes = s0.latent_dim * s0.latent_dim;
    f.wk_bytes = f.wq_bytes;
    f.wv_bytes = f.wq_bytes;
    f.w_msa_bytes = f.wq_bytes;
    f.w_fc1_bytes = s0.latent_dim * s0.mlp_hidden;
    f.w_fc2_bytes = s0.mlp_hidden * s0.latent_dim;
    return f;
}

} // namespace vita
