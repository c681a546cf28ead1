#pragma once

// Published reference measurements for the accelerator at its default
// configuration (U = 352 at 150 MHz, 0.88 W). The simulator compares its
// own numbers against these in `--compare paper` mode and in the
// acceptance suite.

#include <cstdint>
#include <string>

namespace vita {

struct ReferencePerf {
    const char* model;
    std::int64_t image; // square input edge in pixels
    double hue;         // fraction
    double fps;
    double energy_j;    // per frame
};

inline constexpr ReferencePerf kReferencePerf[] = {
    {"vit_b16", 256, 0.932, 2.17, 0.406},
    {"vit_b16", 224, 0.928, 2.75, 0.320},
    {"deit_s", 224, 0.872, 9.36, 0.094},
    {"deit_t", 224, 0.662, 19.01, 0.046},
    {"swin_t", 224, 0.810, 8.71, 0.101},
};

struct ReferenceBreakdown {
    const char* model;
    std::int64_t image;
    double msa_pct;
    double mlp_pct;
    double pm_pct;
    double tol_pp; // tolerance in percentage points
};

inline constexpr ReferenceBreakdown kReferenceBreakdown[] = {
    {"vit_b16", 256, 36.8, 63.2, 0.0, 0.2},
    {"vit_b16", 224, 36.1, 63.9, 0.0, 0.2},
    {"deit_s", 224, 38.6, 61.4, 0.0, 0.2},
    {"deit_t", 224, 43.1, 56.9, 0.0, 0.2},
    {"swin_t", 224, 31.9, 63.8, 4.3, 0.5},
};

// On-chip footprint of the ViT-base working set: 256×768 int8 tokens and
// one 768×768 int8 weight matrix.
inline constexpr std::int64_t kReferenceInputBytes = 196608;
inline constexpr std::int64_t kReferenceWeightMatrixBytes = 589824;

inline const ReferencePerf* find_reference_perf(const std::string& model, std::int64_t image) {
    for (const auto& r : kReferencePerf)
        if (model == r.model && image == r.image) return &r;
    return nullptr;
}

inline const ReferenceBreakdown* find_reference_breakdown(const std::string& model,
                                                          std::int64_t image) {
    for (const auto& r : kReferenceBreakdown)
        if (model == r.model && image == r.image) return &r;
    return nullptr;
}

} // namespace vita
