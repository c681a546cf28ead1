#pragma once

// Analytical performance and resource model. Evaluates the closed form of
// the event simulator's recurrences, so on regular shapes the two agree
// exactly; validate_against_trace enforces the published tolerances
// (schedule span within 1%, per-lane busy cycles within 2%, weight traffic
// exact).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vita/accelerator.hpp"
#include "vita/timing.hpp"
#include "vita/trace.hpp"
#include "vita/workload.hpp"

namespace vita {

// Fraction of the LUT budget reserved for control, interconnect and glue
// logic; only the remainder is available for MAC units.
inline constexpr double kControlLutReserve = 0.25;

inline std::int64_t usable_mac_luts(const AcceleratorSpec& spec) {
    return static_cast<std::int64_t>(
        (1.0 - kControlLutReserve) * static_cast<double>(spec.lut_budget));
}

inline void check_lut_budget(const AcceleratorSpec& spec) {
    const std::int64_t need = spec.mac_units() * spec.luts_per_mac;
    if (need > usable_mac_luts(spec))
        throw ResourceError("MAC array needs " + std::to_string(need) +
                            " LUTs but only " + std::to_string(usable_mac_luts(spec)) +
                            " are usable (" + std::to_string(spec.lut_budget) +
                            " total minus control reserve)");
}

// ---------------------------------------------------------------------------
// Cycle buckets. total() is exact: every cycle of the schedule lands in
// exactly one bucket.

struct PhaseCycles {
    std::int64_t qkv = 0;         // engine 1: Q/K/V column streaming (compute)
    std::int64_t attn = 0;        // engine 2 span not hidden under engine 1
    std::int64_t msa_proj = 0;    // attention output projection (compute)
    std::int64_t mlp = 0;         // fused MLP (compute)
    std::int64_t patch_merge = 0; // token merging between stages (compute)
    std::int64_t overhead = 0;    // LayerNorm passes and phase drains
    std::int64_t stall = 0;       // DRAM bandwidth stalls, all phases

    std::int64_t total() const {
        return qkv + attn + msa_proj + mlp + patch_merge + overhead + stall;
    }
};

struct PhaseBandwidth {
    std::string phase;
    std::int64_t stage = 0;
    double demand_bytes_per_cycle = 0.0; // effective: fetched bytes / period
    std::int64_t stall_cycles = 0;       // per single phase instance
};

// ---------------------------------------------------------------------------
// On-chip buffer model. Only the live buffers of the current phase occupy
// BRAM; LayerNorm inputs are re-read from the token slab with cached
// per-token statistics (8 bytes each), and MLP output accumulators are kept
// at 16 bits. Windowed stages that do not fit resident fall back to
// band-wise execution (one strip of window rows at a time), which trades
// extra DRAM traffic for capacity and leaves the cycle model unchanged.

namespace detail {

struct BramSlab {
    const char* name = "";
    std::int64_t bytes = 0;
};

struct PhasePeak {
    std::int64_t bytes = 0;
    const char* largest = "";
    std::int64_t largest_bytes = 0;
};

inline PhasePeak sum_slabs(std::initializer_list<BramSlab> slabs) {
    PhasePeak p;
    for (const auto& s : slabs) {
        p.bytes += s.bytes;
        if (s.bytes > p.largest_bytes) {
            p.largest_bytes = s.bytes;
            p.largest = s.name;
        }
    }
    return p;
}

// Peak occupancy of each phase of a transformer layer with n resident
// tokens. Q/K double-buffer across heads and V triple-buffers (block 5
// still reads all of V for head h while engine 1 fills head h+2).
inline PhasePeak attn_bram(std::int64_t n, std::int64_t d, std::int64_t dh, std::int64_t np) {
    return sum_slabs({{"token slabs (input + attention out)", 2 * n * d},
                      {"layernorm statistics", 8 * n},
                      {"Q/K/V head buffers", 7 * n * dh},
                      {"attention row buffers", 3 * np},
                      {"weight column double buffer", 6 * d}});
}

inline PhasePeak proj_bram(std::int64_t n, std::int64_t d) {
    return sum_slabs({{"token slabs (input, attention out, residual)", 3 * n * d},
                      {"weight column double buffer", 2 * d},
                      {"column accumulators", 4 * n}});
}

inline PhasePeak mlp_bram(std::int64_t n, std::int64_t d) {
    return sum_slabs({{"residual token slab", n * d},
                      {"output accumulators (16-bit)", 2 * n * d},
                      {"layernorm statistics", 8 * n},
                      {"hidden column double buffer", 2 * n},
                      {"weight column double buffer", 4 * d}});
}

inline PhasePeak pm_bram(std::int64_t n_out, std::int64_t inner, std::int64_t d_out) {
    return sum_slabs({{"input token slab", n_out * inner},
                      {"output token slab", n_out * d_out},
                      {"weight column double buffer", 2 * inner},
                      {"column accumulators", 4 * n_out}});
}

} // namespace detail

struct StageBramUsage {
    std::int64_t stage = 0;
    std::string phase;            // phase holding the stage peak
    std::int64_t peak_bytes = 0;
    std::string largest_buffer;
    std::int64_t largest_bytes = 0;
    bool banded = false;          // band-wise execution (windowed stages only)
    std::int64_t band_tokens = 0; // resident tokens per band when banded
    std::int64_t bands = 1;
};

struct BramReport {
    std::int64_t budget_bytes = 0;
    std::int64_t peak_bytes = 0;   // max over stages after banding
    std::int64_t peak_stage = 0;
    std::string peak_phase;
    bool fits = false;
    std::vector<StageBramUsage> stages;      // one per attention stage
    std::vector<StageBramUsage> merges;      // one per patch-merge op

    const StageBramUsage* stage_usage(std::int64_t stage) const {
        for (const auto& s : stages)
            if (s.stage == stage) return &s;
        return nullptr;
    }
};

inline BramReport bram_usage(const Workload& w, const AcceleratorSpec& spec) {
    BramReport r;
    r.budget_bytes = spec.bram_bytes;
    r.fits = true;

    auto eval_stage = [](const StageShape& st, std::int64_t n) {
        struct Named {
            const char* phase;
            detail::PhasePeak peak;
        };
        Named phases[3] = {
            {"attention", detail::attn_bram(n, st.latent_dim, st.head_dim, st.attn_tokens)},
            {"projection", detail::proj_bram(n, st.latent_dim)},
            {"mlp", detail::mlp_bram(n, st.latent_dim)},
        };
        Named* top = &phases[0];
        for (auto& p : phases)
            if (p.peak.bytes > top->peak.bytes) top = &p;
        return *top;
    };

    for (std::size_t si = 0; si < w.stages.size(); ++si) {
        const StageShape& st = w.stages[si];
        StageBramUsage u;
        u.stage = static_cast<std::int64_t>(si);
        u.band_tokens = st.tokens;

        auto top = eval_stage(st, st.tokens);
        if (top.peak.bytes > spec.bram_bytes && st.window > 0 && st.grid_h > st.window) {
            // Band-wise: one strip of `window` grid rows resident at a time.
            u.banded = true;
            u.band_tokens = st.window * st.grid_w;
            u.bands = ceil_div(st.grid_h, st.window);
            top = eval_stage(st, u.band_tokens);
        }
        u.phase = top.phase;
        u.peak_bytes = top.peak.bytes;
        u.largest_buffer = top.peak.largest;
        u.largest_bytes = top.peak.largest_bytes;
        if (u.peak_bytes > spec.bram_bytes) r.fits = false;
        if (u.peak_bytes > r.peak_bytes) {
            r.peak_bytes = u.peak_bytes;
            r.peak_stage = u.stage;
            r.peak_phase = u.phase;
        }
        r.stages.push_back(std::move(u));
    }

    for (const auto& op : w.ops) {
        if (op.kind != OpKind::patch_merge) continue;
        StageBramUsage u;
        u.stage = op.stage;
        u.phase = "patch-merge";
        auto peak = detail::pm_bram(op.rows, op.inner, op.outer);
        u.peak_bytes = peak.bytes;
        u.largest_buffer = peak.largest;
        u.largest_bytes = peak.largest_bytes;
        u.band_tokens = op.rows;
        if (u.peak_bytes > spec.bram_bytes) r.fits = false;
        if (u.peak_bytes > r.peak_bytes) {
            r.peak_bytes = u.peak_bytes;
            r.peak_stage = u.stage;
            r.peak_phase = u.phase;
        }
        r.merges.push_back(std::move(u));
    }
    return r;
}

inline void check_bram(const BramReport& r) {
    if (r.fits) return;
    // Name the first offender for the error message.
    auto offender = [&]() -> const StageBramUsage* {
        for (const auto& s : r.stages)
            if (s.peak_bytes > r.budget_bytes) return &s;
        for (const auto& s : r.merges)
            if (s.peak_bytes > r.budget_bytes) return &s;
        return nullptr;
    }();
    std::string msg = "on-chip buffers exceed BRAM capacity";
    if (offender) {
        msg += ": stage " + std::to_string(offender->stage) + " " + offender->phase +
               " phase needs " + std::to_string(offender->peak_bytes) + " bytes (largest: " +
               offender->largest_buffer + ", " + std::to_string(offender->largest_bytes) +
               " bytes) against a budget of " + std::to_string(r.budget_bytes);
    }
    throw ResourceError(msg);
}

// ---------------------------------------------------------------------------
// DRAM traffic. Weights stream once per layer; banded stages re-stream
// their weights once per band and spill/reload the token slab around every
// layer. Input activations enter once, outputs leave once; patch embedding
// is outside the costed scope.

inline std::int64_t dram_traffic_bytes(const Workload& w, const BramReport& bram) {
    std::int64_t total = 0;
    for (const auto& op : w.ops) {
        if (op.weight_bytes == 0) continue;
        std::int64_t factor = 1;
        if (op.kind != OpKind::patch_merge) {
            if (const auto* su = bram.stage_usage(op.stage); su && su->banded)
                factor = su->bands;
        }
        total += op.weight_bytes * factor;
    }
    for (const auto& su : bram.stages) {
        if (!su.banded) continue;
        const StageShape& st = w.stages[static_cast<std::size_t>(su.stage)];
        total += 2 * st.tokens * st.latent_dim * st.depth; // per-layer spill + reload
    }
    const StageShape& first = w.stages.front();
    const StageShape& last = w.stages.back();
    total += first.tokens * first.latent_dim; // input tokens in
    total += last.tokens * last.latent_dim;   // output tokens out
    return total;
}

// ---------------------------------------------------------------------------
// Top-level report.

struct PerfReport {
    std::int64_t total_cycles = 0;
    PhaseCycles phases;
    double hue = 0.0;      // useful MACs / (cycles × MAC units)
    double fps = 0.0;
    double energy_j = 0.0; // energy per frame at the configured power draw
    double avg_bytes_per_cycle = 0.0;
    double peak_bytes_per_cycle = 0.0;
    std::int64_t bram_peak_bytes = 0;
    std::int64_t mac_units = 0;
    std::int64_t useful_macs = 0;
    std::int64_t traffic_bytes = 0;
    bool starved = false; // zero DRAM rate with nonzero weight traffic
    std::vector<PhaseBandwidth> bandwidth;
};

inline double hue(const Workload& w, const AcceleratorSpec& spec, std::int64_t cycles) {
    if (cycles <= 0) throw NumericError("hue: cycle count must be positive");
    const std::int64_t u = spec.mac_units();
    if (u <= 0) throw NumericError("hue: accelerator has no MAC units");
    return static_cast<double>(w.total_macs()) /
           (static_cast<double>(cycles) * static_cast<double>(u));
}

inline double cycles_to_fps(const AcceleratorSpec& spec, std::int64_t cycles) {
    if (!(spec.clock_hz > 0.0)) throw NumericError("clock frequency must be positive");
    if (cycles <= 0) throw NumericError("fps: cycle count must be positive");
    return spec.clock_hz / static_cast<double>(cycles);
}

inline double fps_to_energy_j(const AcceleratorSpec& spec, double fps) {
    if (!(fps > 0.0)) throw NumericError("energy: fps must be positive");
    return spec.power_w / fps;
}

struct AnalyzeOptions {
    bool overlap_proj = false;
};

inline PerfReport analyze(const Workload& w, const AcceleratorSpec& spec,
                          const AnalyzeOptions& opts = {}) {
    spec.validate();
    if (w.ops.empty() || w.stages.empty()) throw EmptyWorkloadError("analyze: empty workload");
    check_lut_budget(spec);
    BramReport bram = bram_usage(w, spec);
    check_bram(bram);

    PerfReport r;
    r.mac_units = spec.mac_units();
    r.bram_peak_bytes = bram.peak_bytes;
    const std::int64_t bw = spec.bytes_per_cycle();

    auto note_bw = [&](const char* phase, std::int64_t stage, const ColumnPhase& ph,
                       bool dedupe) {
        if (dedupe)
            for (const auto& e : r.bandwidth)
                if (e.stage == stage && e.phase == phase) return;
        PhaseBandwidth e;
        e.phase = phase;
        e.stage = stage;
        e.demand_bytes_per_cycle =
            ph.period > 0 ? static_cast<double>(ph.fetch_bytes) / static_cast<double>(ph.period)
                          : 0.0;
        e.stall_cycles = ph.stall_cycles();
        r.peak_bytes_per_cycle =
            std::max(r.peak_bytes_per_cycle, e.demand_bytes_per_cycle);
        r.bandwidth.push_back(std::move(e));
    };

    for (const auto& op : w.ops) {
        switch (op.kind) {
            case OpKind::patch_merge: {
                ColumnPhase pm = patch_merge_phase(op, spec);
                r.phases.patch_merge += pm.geom_span();
                r.phases.stall += pm.stall_cycles();
                r.phases.overhead += spec.phase_drain_cycles;
                note_bw("patch-merge", op.stage, pm, false);
                break;
            }
            case OpKind::layernorm: {
                const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
                r.phases.overhead += spec.ln_cycles_per_token * st.tokens;
                break;
            }
            case OpKind::qkv_proj: {
                const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
                const AttnSpan att = attn_span(st, spec);
                const ColumnPhase proj = proj_phase(st, spec);
                std::int64_t segment = att.total + proj.span();
                if (opts.overlap_proj)
                    segment = att.total - att.tail + std::max(att.tail, proj.span());
                r.phases.qkv += att.heads * att.e1_head_geom;
                r.phases.stall += att.heads * (att.e1_head - att.e1_head_geom);
                r.phases.msa_proj += proj.geom_span();
                r.phases.stall += proj.stall_cycles();
                r.phases.attn += segment - att.heads * att.e1_head - proj.span();
                r.phases.overhead += 2 * spec.phase_drain_cycles;
                note_bw("qkv", op.stage, qkv_head_phase(st, spec), true);
                note_bw("projection", op.stage, proj, true);
                break;
            }
            case OpKind::mlp_fc1: {
                const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
                ColumnPhase mlp = mlp_phase(st, spec);
                r.phases.mlp += mlp.geom_span();
                r.phases.stall += mlp.stall_cycles();
                r.phases.overhead += spec.phase_drain_cycles;
                note_bw("mlp", op.stage, mlp, true);
                break;
            }
            default:
                break;
        }
    }

    r.total_cycles = r.phases.total();
    r.useful_macs = w.total_macs();
    r.traffic_bytes = dram_traffic_bytes(w, bram);
    r.hue = hue(w, spec, r.total_cycles);
    r.avg_bytes_per_cycle =
        static_cast<double>(r.traffic_bytes) / static_cast<double>(r.total_cycles);
    r.starved = bw == 0 && w.total_weight_bytes() > 0;
    if (r.starved) {
        // No steady state exists without weight bandwidth: rates are zero.
        r.fps = 0.0;
        r.energy_j = 0.0;
    } else {
        r.fps = cycles_to_fps(spec, r.total_cycles);
        r.energy_j = fps_to_energy_j(spec, r.fps);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Cross-checking the two routes.

inline constexpr double kSpanTolerance = 0.01;
inline constexpr double kLaneTolerance = 0.02;

inline void validate_against_trace(const PerfReport& report, const ScheduleTrace& trace,
                                   const Workload& w, const AcceleratorSpec& spec) {
    trace.check_engine_exclusive();
    trace.check_fetch_before_compute();

    auto within = [](std::int64_t got, std::int64_t want, double tol) {
        const double base = std::max<std::int64_t>(want, 1);
        return std::abs(static_cast<double>(got - want)) <= tol * base;
    };

    if (!within(trace.span(), report.total_cycles, kSpanTolerance))
        throw ModelDivergenceError(
            "trace span " + std::to_string(trace.span()) + " vs analytical total " +
            std::to_string(report.total_cycles) + " differ by more than 1%");

    // Expected busy cycles per lane from the closed-form phases.
    std::int64_t qkv_busy = 0, score_busy = 0, apply_busy = 0, softmax_busy = 0;
    std::int64_t pool_busy = 0, ln_busy = 0;
    for (const auto& op : w.ops) {
        if (op.kind == OpKind::patch_merge) {
            pool_busy += patch_merge_phase(op, spec).span();
        } else if (op.kind == OpKind::qkv_proj) {
            const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
            qkv_busy += st.heads * qkv_head_phase(st, spec).span();
            const AttnRowTimes rt = attn_row_times(st, spec);
            score_busy += st.heads * rt.rows * rt.t_score;
            apply_busy += st.heads * rt.rows * rt.t_apply;
            softmax_busy += st.heads * rt.rows * rt.t_softmax;
            pool_busy += proj_phase(st, spec).span();
        } else if (op.kind == OpKind::mlp_fc1) {
            const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
            pool_busy += mlp_phase(st, spec).span();
        } else if (op.kind == OpKind::layernorm) {
            const StageShape& st = w.stages[static_cast<std::size_t>(op.stage)];
            ln_busy += spec.ln_cycles_per_token * st.tokens;
        }
    }

    struct LaneCheck {
        Engine lane;
        std::int64_t expected;
    };
    const LaneCheck checks[] = {
        {Engine::qkv1, qkv_busy},   {Engine::qkv2, qkv_busy}, {Engine::qkv3, qkv_busy},
        {Engine::score, score_busy}, {Engine::apply, apply_busy},
        {Engine::softmax, softmax_busy}, {Engine::pool, pool_busy}, {Engine::ln, ln_busy},
    };
    for (const auto& c : checks) {
        const std::int64_t got = trace.busy_cycles(c.lane);
        if (c.expected == 0 ? got != 0 : !within(got, c.expected, kLaneTolerance))
            throw ModelDivergenceError(std::string("lane ") + engine_name(c.lane) + " busy " +
                                       std::to_string(got) + " vs expected " +
                                       std::to_string(c.expected) + " differ by more than 2%");
    }

    const std::int64_t want_bytes = w.total_weight_bytes();
    if (trace.fetch_bytes() != want_bytes)
        throw ModelDivergenceError("trace weight traffic " + std::to_string(trace.fetch_bytes()) +
                                   " bytes vs workload " + std::to_string(want_bytes));
}

} // namespace vita
