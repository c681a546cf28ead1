#pragma once

#include <cstdint>
#include <string>

#include "vita/errors.hpp"
#include "vita/toml_lite.hpp"
#include "vita/util.hpp"

namespace vita {

// PE geometry and platform constants. Engine 1 is three k1×k2 blocks that
// produce Q, K and V columns; engine 2 is two k3×k4 blocks for the score
// (QK^T) and apply (S·V) matmuls. The projection, MLP and patch-merge
// phases reuse all five blocks as one pool of U MAC units.
struct AcceleratorSpec {
    std::int64_t k1 = 16;
    std::int64_t k2 = 6;
    std::int64_t k3 = 8;
    std::int64_t k4 = 4;

    double clock_hz = 150e6;
    double power_w = 0.88;

    std::int64_t word_bytes = 4;          // DRAM word size
    std::int64_t dram_words_per_cycle = 1;

    std::int64_t bram_bytes = 645120;     // 630 KB
    std::int64_t lut_budget = 53200;
    std::int64_t luts_per_mac = 90;
    std::int64_t dsp_budget = 220;        // informational; int8 MACs live in LUTs

    // Overhead knobs. softmax_row_fill_cycles < 0 means "use the head
    // dimension of the current stage" (one element per cycle row fill).
    std::int64_t softmax_row_fill_cycles = -1;
    std::int64_t ln_cycles_per_token = 0;
    std::int64_t phase_drain_cycles = 0;

    std::int64_t engine1_units() const { return 3 * k1 * k2; }
    std::int64_t engine2_units() const { return 2 * k3 * k4; }
    std::int64_t mac_units() const { return engine1_units() + engine2_units(); }
    std::int64_t bytes_per_cycle() const { return word_bytes * dram_words_per_cycle; }
    std::int64_t softmax_fill_for(std::int64_t head_dim) const {
        return softmax_row_fill_cycles < 0 ? head_dim : softmax_row_fill_cycles;
    }

    void validate() const {
        if (k1 < 1 || k2 < 1 || k3 < 1 || k4 < 1)
            throw NumericError("accelerator: PE block dims must be positive");
        if (!(clock_hz > 0)) throw NumericError("accelerator: clock_hz must be positive");
        if (!(power_w > 0)) throw NumericError("accelerator: power_w must be positive");
        if (word_bytes < 1) throw NumericError("accelerator: word_bytes must be positive");
        if (dram_words_per_cycle < 0)
            throw NumericError("accelerator: dram_words_per_cycle must be non-negative");
        if (bram_bytes < 1 || lut_budget < 1 || luts_per_mac < 1)
            throw NumericError("accelerator: resource budgets must be positive");
        if (ln_cycles_per_token < 0 || phase_drain_cycles < 0)
            throw NumericError("accelerator: overhead cycles must be non-negative");
    }

    std::string config_string() const {
        return "(" + std::to_string(k1) + "," + std::to_string(k2) + "," +
               std::to_string(k3) + "," + std::to_string(k4) + ")";
    }
};

// Config file mirrors the struct field names, all optional:
//   k1 = 16 ... dram_words_per_cycle = 1, softmax_row_fill_cycles = -1, ...
inline AcceleratorSpec accelerator_from_toml(const toml::Table& t) {
    AcceleratorSpec s;
    s.k1 = t.get_int("k1", s.k1);
    s.k2 = t.get_int("k2", s.k2);
    s.k3 = t.get_int("k3", s.k3);
    s.k4 = t.get_int("k4", s.k4);
    s.clock_hz = t.get_float("clock_hz", s.clock_hz);
    s.power_w = t.get_float("power_w", s.power_w);
    s.word_bytes = t.get_int("word_bytes", s.word_bytes);
    s.dram_words_per_cycle = t.get_int("dram_words_per_cycle", s.dram_words_per_cycle);
    s.bram_bytes = t.get_int("bram_bytes", s.bram_bytes);
    s.lut_budget = t.get_int("lut_budget", s.lut_budget);
    s.luts_per_mac = t.get_int("luts_per_mac", s.luts_per_mac);
    s.dsp_budget = t.get_int("dsp_budget", s.dsp_budget);
    s.softmax_row_fill_cycles = t.get_int("softmax_row_fill_cycles", s.softmax_row_fill_cycles);
    s.ln_cycles_per_token = t.get_int("ln_cycles_per_token", s.ln_cycles_per_token);
    s.phase_drain_cycles = t.get_int("phase_drain_cycles", s.phase_drain_cycles);
    s.validate();
    return s;
}

inline AcceleratorSpec load_accelerator_file(const std::string& path) {
    return accelerator_from_toml(toml::parse_file(path));
}

} // namespace vita
