#pragma once

// Cycle model shared by the analytical performance model and the event
// simulator. All quantities are exact integers so the two routes can be
// compared for equality, not just approximate agreement.
//
// Conventions:
//  - Weight-streaming phases advance one output column per "column period".
//    The period is the tiled compute time, stretched when fetching the next
//    column's weights cannot keep up with the DRAM rate (a bandwidth stall).
//  - The first column's weights are prefetched during the previous phase,
//    so phases carry no fetch prologue.
//  - Attention runs row-granularly: block 4 (QK^T row), softmax, block 5
//    (S·V row) form a three-stage pipeline; heads overlap engine 1 and
//    engine 2 with a one-head skew.

#include <algorithm>
#include <cstdint>
#include <limits>

#include "vita/accelerator.hpp"
#include "vita/util.hpp"
#include "vita/workload.hpp"

namespace vita {

// One weight-streaming phase (QKV per head, projection, MLP, patch merge).
struct ColumnPhase {
    std::int64_t columns = 0;       // output columns streamed
    std::int64_t compute_cycles = 0; // tiled compute cycles per column
    std::int64_t fetch_bytes = 0;    // weight bytes fetched per column
    std::int64_t period = 0;         // max(compute, fetch time) per column
    bool starved = false;            // zero DRAM rate but bytes required

    std::int64_t span() const { return columns * period; }
    std::int64_t stall_cycles() const { return columns * (period - compute_cycles); }
    std::int64_t geom_span() const { return columns * compute_cycles; }
    std::int64_t total_fetch_bytes() const { return columns * fetch_bytes; }
};

// A starved phase (bytes needed at zero DRAM rate) keeps its compute-only
// period so spans stay finite; callers must surface the starved flag as an
// all-stall degenerate report instead of trusting the span.
inline ColumnPhase make_column_phase(std::int64_t columns, std::int64_t compute_cycles,
                                     std::int64_t fetch_bytes, const AcceleratorSpec& spec) {
    ColumnPhase p;
    p.columns = columns;
    p.compute_cycles = compute_cycles;
    p.fetch_bytes = fetch_bytes;
    std::int64_t bw = spec.bytes_per_cycle();
    if (bw > 0) {
        p.period = std::max(compute_cycles, ceil_div(fetch_bytes, bw));
    } else {
        p.period = compute_cycles;
        p.starved = fetch_bytes > 0;
    }
    return p;
}

// Engine 1: blocks 1-3 produce one column of Q, K and V per period; a head
// needs Dh columns. Each column step fetches one weight column for each of
// the three matrices (3·D bytes).
inline ColumnPhase qkv_head_phase(const StageShape& st, const AcceleratorSpec& spec) {
    std::int64_t compute = ceil_div(st.tokens, spec.k1) * ceil_div(st.latent_dim, spec.k2);
    return make_column_phase(st.head_dim, compute, 3 * st.latent_dim, spec);
}

// Engine 2 row times for one attention instance of N' tokens.
struct AttnRowTimes {
    std::int64_t t_score = 0;   // block 4, one QK^T row
    std::int64_t t_softmax = 0; // softmax unit, one row
    std::int64_t t_apply = 0;   // block 5, one S·V row
    std::int64_t rows = 0;      // total rows per head (windows × N')
    std::int64_t bottleneck() const { return std::max({t_score, t_softmax, t_apply}); }
    std::int64_t tail() const { return t_score + t_softmax + t_apply - bottleneck(); }
    std::int64_t steady_span() const { return rows * bottleneck(); }
};

inline AttnRowTimes attn_row_times(const StageShape& st, const AcceleratorSpec& spec) {
    AttnRowTimes t;
    t.t_score = ceil_div(st.attn_tokens, spec.k3) * ceil_div(st.head_dim, spec.k4);
    t.t_apply = ceil_div(st.head_dim, spec.k3) * ceil_div(st.attn_tokens, spec.k4);
    t.t_softmax = spec.softmax_fill_for(st.head_dim);
    t.rows = st.window_count * st.attn_tokens;
    return t;
}

// Full attention span for one layer: engine 1 and engine 2 overlap with a
// one-head skew, so the slower engine's per-head span repeats k times, the
// faster one contributes a single fill term, and the row pipeline drains
// once at the very end.
struct AttnSpan {
    std::int64_t e1_head = 0;      // engine-1 span per head (with stalls)
    std::int64_t e1_head_geom = 0; // engine-1 compute-only span per head
    std::int64_t e2_head = 0;      // engine-2 steady-state span per head
    std::int64_t tail = 0;
    std::int64_t heads = 0;
    std::int64_t total = 0;
};

inline AttnSpan attn_span(const StageShape& st, const AcceleratorSpec& spec) {
    ColumnPhase e1 = qkv_head_phase(st, spec);
    AttnRowTimes rt = attn_row_times(st, spec);
    AttnSpan s;
    s.e1_head = e1.span();
    s.e1_head_geom = e1.geom_span();
    s.e2_head = rt.steady_span();
    s.tail = rt.tail();
    s.heads = st.heads;
    s.total = std::min(s.e1_head, s.e2_head) + st.heads * std::max(s.e1_head, s.e2_head) + s.tail;
    return s;
}

// Pool phases: all five blocks fused into U MAC units, streaming output
// columns. MLP uses the fused two-half scheme: floor(U/2) units accumulate
// hidden columns, the other half consumes them through the activation, and
// one extra column period drains the lagging output half.
inline ColumnPhase proj_phase(const StageShape& st, const AcceleratorSpec& spec) {
    std::int64_t compute = ceil_div(st.tokens * st.latent_dim, spec.mac_units());
    return make_column_phase(st.latent_dim, compute, st.latent_dim, spec);
}

inline ColumnPhase mlp_phase(const StageShape& st, const AcceleratorSpec& spec) {
    std::int64_t half = spec.mac_units() / 2;
    if (half < 1) half = 1;
    std::int64_t compute = ceil_div(st.tokens * st.latent_dim, half);
    // per hidden column: one FC1 weight column + one FC2 weight row
    return make_column_phase(st.mlp_hidden + 1, compute, 2 * st.latent_dim, spec);
}

inline ColumnPhase patch_merge_phase(const LayerOp& op, const AcceleratorSpec& spec) {
    std::int64_t compute = ceil_div(op.rows * op.inner, spec.mac_units());
    return make_column_phase(op.outer, compute, op.inner, spec);
}

// The trailing MLP column period fetches nothing (drain of the output half).
inline std::int64_t mlp_fetch_total_bytes(const StageShape& st, const AcceleratorSpec& spec) {
    return mlp_phase(st, spec).fetch_bytes * st.mlp_hidden;
}

// Per-layer overhead outside the matmul pipelines.
inline std::int64_t layer_overhead_cycles(const StageShape& st, const AcceleratorSpec& spec) {
    std::int64_t ln = 2 * spec.ln_cycles_per_token * st.tokens;
    std::int64_t drains = 3 * spec.phase_drain_cycles; // attention, projection, MLP
    return ln + drains;
}

struct LayerSpanBreakdown {
    AttnSpan attn;
    ColumnPhase proj;
    ColumnPhase mlp;
    std::int64_t overhead = 0;
    std::int64_t total = 0;
};

inline LayerSpanBreakdown layer_span(const StageShape& st, const AcceleratorSpec& spec) {
    LayerSpanBreakdown b;
    b.attn = attn_span(st, spec);
    b.proj = proj_phase(st, spec);
    b.mlp = mlp_phase(st, spec);
    b.overhead = layer_overhead_cycles(st, spec);
    b.total = b.attn.total + b.proj.span() + b.mlp.span() + b.overhead;
    return b;
}

} // namespace vita
