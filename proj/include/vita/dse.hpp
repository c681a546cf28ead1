#pragma once

// Design-space exploration over the four tile dimensions (k1, k2) for the
// Q/K/V engine and (k3, k4) for the attention engine. A configuration is
// feasible when its MAC array fits the usable LUT budget and the workload's
// buffers fit BRAM (buffer sizes do not depend on the tiling, so that check
// runs once). Feasible points are ranked by:
//   1. HUE class = floor(HUE / 0.005), higher first. Utilization is compared
//      in half-point steps because sub-half-point HUE differences come from
//      fixed pipeline fill/drain terms that shrink relative to runtime as the
//      array grows; treating them as significant would always favor the
//      smallest array. Within a class the search prefers throughput.
//   2. MAC count U, higher first (more parallelism at equal efficiency)
//   3. exact HUE, higher first, compared in exact integers
//   4. tile aspect penalty (k1-2·k2)^2 + (k3-2·k4)^2, lower first: the
//      engines produce/consume head columns at matched rates only when the
//      tiles keep the 2:1 row/column shape of the chosen design point, and
//      this key separates mirror configurations with identical cycle counts
//   5. lexicographic (k1,k2,k3,k4), lower first, to make ordering total

#include <algorithm>
#include <cstdint>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "vita/accelerator.hpp"
#include "vita/perf.hpp"
#include "vita/util.hpp"
#include "vita/workload.hpp"

namespace vita {

struct TileConfig {
    std::int64_t k1 = 16;
    std::int64_t k2 = 6;
    std::int64_t k3 = 8;
    std::int64_t k4 = 4;

    std::int64_t mac_units() const { return 3 * k1 * k2 + 2 * k3 * k4; }
    std::int64_t aspect_penalty() const {
        const std::int64_t a = k1 - 2 * k2;
        const std::int64_t b = k3 - 2 * k4;
        return a * a + b * b;
    }
    std::string to_string() const {
        return "(" + std::to_string(k1) + "," + std::to_string(k2) + "," +
               std::to_string(k3) + "," + std::to_string(k4) + ")";
    }
    bool operator==(const TileConfig&) const = default;
};

inline AcceleratorSpec with_tile(AcceleratorSpec spec, const TileConfig& t) {
    spec.k1 = t.k1;
    spec.k2 = t.k2;
    spec.k3 = t.k3;
    spec.k4 = t.k4;
    return spec;
}

struct ResourceBudget {
    std::int64_t lut_budget = 53200;   // ZC7020 defaults
    std::int64_t dsp_budget = 220;
    std::int64_t bram_bytes = 645120;
    std::int64_t luts_per_mac = 90;
    double control_lut_reserve = kControlLutReserve;

    std::int64_t usable_mac_luts() const {
        return static_cast<std::int64_t>((1.0 - control_lut_reserve) *
                                         static_cast<double>(lut_budget));
    }
};

inline ResourceBudget zc7020_budget() { return {}; }

inline ResourceBudget zcu102_budget() {
    ResourceBudget b;
    b.lut_budget = 274080;
    b.dsp_budget = 2520;
    b.bram_bytes = 4194304;
    return b;
}

inline AcceleratorSpec with_budget(AcceleratorSpec spec, const ResourceBudget& budget) {
    spec.lut_budget = budget.lut_budget;
    spec.dsp_budget = budget.dsp_budget;
    spec.bram_bytes = budget.bram_bytes;
    spec.luts_per_mac = budget.luts_per_mac;
    return spec;
}

struct TileBounds {
    std::int64_t k1_min = 1, k1_max = 64;
    std::int64_t k2_min = 1, k2_max = 16;
    std::int64_t k3_min = 1, k3_max = 64;
    std::int64_t k4_min = 1, k4_max = 16;
};

inline std::vector<TileConfig> enumerate_configs(const ResourceBudget& budget,
                                                 const TileBounds& bounds = {}) {
    std::vector<TileConfig> out;
    const std::int64_t usable = budget.usable_mac_luts();
    for (std::int64_t k1 = bounds.k1_min; k1 <= bounds.k1_max; ++k1)
        for (std::int64_t k2 = bounds.k2_min; k2 <= bounds.k2_max; ++k2)
            for (std::int64_t k3 = bounds.k3_min; k3 <= bounds.k3_max; ++k3)
                for (std::int64_t k4 = bounds.k4_min; k4 <= bounds.k4_max; ++k4) {
                    TileConfig t{k1, k2, k3, k4};
                    if (t.mac_units() * budget.luts_per_mac <= usable) out.push_back(t);
                }
    if (out.empty())
        throw NoFeasibleConfigError("no tile configuration fits " + std::to_string(usable) +
                                    " usable LUTs at " + std::to_string(budget.luts_per_mac) +
                                    " LUTs per MAC");
    return out;
}

// Compute/DRAM balance for the first stage: engine 1 produces one Q/K/V
// column every ceil(N/k1)·ceil(D/k2) cycles while engine 2 consumes one in
// roughly (N/k3)·(Dh/k4)·(N/Dh) cycles; the residual below is the exact
// rational mismatch |D·k3·k4 − N·k1·k2| / (k1·k2·k3·k4) in cycles per
// token-column, zero when the engines are perfectly matched.
struct BalanceResidual {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline BalanceResidual balance_residual(const Workload& w, const TileConfig& t) {
    const StageShape& st = w.stages.front();
    BalanceResidual r;
    const std::int64_t diff = st.latent_dim * t.k3 * t.k4 - st.tokens * t.k1 * t.k2;
    r.num = diff < 0 ? -diff : diff;
    r.den = t.k1 * t.k2 * t.k3 * t.k4;
    return r;
}

struct DSEResult {
    TileConfig config;
    std::int64_t mac_units = 0;
    std::int64_t total_cycles = 0;
    double hue = 0.0;
    int hue_class = 0; // floor(hue / 0.005), the coarse key used for ranking
    double fps = 0.0;
    std::int64_t bram_peak_bytes = 0;
    BalanceResidual residual;
};

// Half-point utilization class, computed in exact integers:
// floor(HUE / 0.005) = (useful_macs * 200) / (cycles * U).
inline int hue_class_of(std::int64_t useful_macs, std::int64_t cycles, std::int64_t mac_units) {
    return static_cast<int>((useful_macs * 200) / (cycles * mac_units));
}

// Strict ranking described at the top of this header. Keys 1 and 3 compare
// HUE without floating point: the useful-MAC numerator is shared by all
// candidates, so HUE_a > HUE_b iff cycles_a·U_a < cycles_b·U_b.
inline bool dse_better(const DSEResult& a, const DSEResult& b) {
    if (a.hue_class != b.hue_class) return a.hue_class > b.hue_class;
    if (a.mac_units != b.mac_units) return a.mac_units > b.mac_units;
    const std::int64_t ca = a.total_cycles * a.mac_units;
    const std::int64_t cb = b.total_cycles * b.mac_units;
    if (ca != cb) return ca < cb;
    const std::int64_t pa = a.config.aspect_penalty();
    const std::int64_t pb = b.config.aspect_penalty();
    if (pa != pb) return pa < pb;
    return std::tie(a.config.k1, a.config.k2, a.config.k3, a.config.k4) <
           std::tie(b.config.k1, b.config.k2, b.config.k3, b.config.k4);
}

struct SearchOptions {
    TileBounds bounds;
    int threads = 0; // 0: VITA_SIM_THREADS env var, else hardware concurrency
    AnalyzeOptions analyze;
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const auto env = env_long("VITA_SIM_THREADS"); env && *env > 0)
        return static_cast<int>(*env);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline std::vector<DSEResult> search_optimal(const Workload& w, const AcceleratorSpec& base,
                                             const ResourceBudget& budget,
                                             const SearchOptions& opts = {}) {
    const std::vector<TileConfig> candidates = enumerate_configs(budget, opts.bounds);

    // Buffer sizes are tiling-independent: one capacity check covers all.
    {
        const AcceleratorSpec probe = with_tile(with_budget(base, budget), candidates.front());
        const BramReport br = bram_usage(w, probe);
        if (!br.fits)
            throw NoFeasibleConfigError(
                "workload buffers exceed BRAM for every tile configuration (stage " +
                std::to_string(br.peak_stage) + " " + br.peak_phase + " phase needs " +
                std::to_string(br.peak_bytes) + " of " + std::to_string(budget.bram_bytes) +
                " bytes)");
    }

    std::vector<DSEResult> results(candidates.size());
    const int threads = resolve_thread_count(opts.threads);
    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const TileConfig& t = candidates[i];
            const AcceleratorSpec spec = with_tile(with_budget(base, budget), t);
            const PerfReport rep = analyze(w, spec, opts.analyze);
            DSEResult r;
            r.config = t;
            r.mac_units = t.mac_units();
            r.total_cycles = rep.total_cycles;
            r.hue = rep.hue;
            r.hue_class = hue_class_of(rep.useful_macs, rep.total_cycles, r.mac_units);
            r.fps = rep.fps;
            r.bram_peak_bytes = rep.bram_peak_bytes;
            r.residual = balance_residual(w, t);
            results[i] = std::move(r);
        }
    };

    if (threads <= 1 || candidates.size() < 2) {
        eval_range(0, candidates.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t n = candidates.size();
        const std::size_t per = (n + static_cast<std::size_t>(threads) - 1) /
                                static_cast<std::size_t>(threads);
        for (int tix = 0; tix < threads; ++tix) {
            const std::size_t lo = static_cast<std::size_t>(tix) * per;
            if (lo >= n) break;
            pool.emplace_back(eval_range, lo, std::min(n, lo + per));
        }
        for (auto& th : pool) th.join();
    }

    std::stable_sort(results.begin(), results.end(), dse_better);
    return results;
}

} // namespace vita
