#pragma once

// Shared JSON report envelope: every CLI command emits
//   { "command": ..., "version": ..., "inputs": {...}, "results": {...} }
// so downstream tooling can parse all outputs with one schema.

#include <string>

#include <json.hpp>

#include "vita/dse.hpp"
#include "vita/perf.hpp"
#include "vita/workload.hpp"

namespace vita {

using json = nlohmann::json;

inline constexpr const char* kReportVersion = "1.0.0";

inline json report_envelope(const std::string& command, json inputs, json results) {
    json j;
    j["command"] = command;
    j["version"] = kReportVersion;
    j["inputs"] = std::move(inputs);
    j["results"] = std::move(results);
    return j;
}

inline json to_json(const PhaseCycles& p) {
    return json{{"qkv", p.qkv},
                {"attn", p.attn},
                {"msa_proj", p.msa_proj},
                {"mlp", p.mlp},
                {"patch_merge", p.patch_merge},
                {"overhead", p.overhead},
                {"stall", p.stall}};
}

inline json to_json(const PerfReport& r) {
    json phases = to_json(r.phases);
    json bw = json::array();
    for (const auto& e : r.bandwidth)
        bw.push_back({{"phase", e.phase},
                      {"stage", e.stage},
                      {"demand_bytes_per_cycle", e.demand_bytes_per_cycle},
                      {"stall_cycles", e.stall_cycles}});
    return json{{"total_cycles", r.total_cycles},
                {"phases", std::move(phases)},
                {"hue", r.hue},
                {"fps", r.fps},
                {"energy_j", r.energy_j},
                {"avg_bytes_per_cycle", r.avg_bytes_per_cycle},
                {"peak_bytes_per_cycle", r.peak_bytes_per_cycle},
                {"bram_peak_bytes", r.bram_peak_bytes},
                {"mac_units", r.mac_units},
                {"useful_macs", r.useful_macs},
                {"traffic_bytes", r.traffic_bytes},
                {"starved", r.starved},
                {"bandwidth", std::move(bw)}};
}

inline json to_json(const MacBreakdown& b) {
    return json{{"msa_macs", b.msa_macs},
                {"mlp_macs", b.mlp_macs},
                {"patch_merge_macs", b.patch_merge_macs},
                {"msa_pct", 100.0 * b.msa_fraction()},
                {"mlp_pct", 100.0 * b.mlp_fraction()},
                {"patch_merge_pct", 100.0 * b.patch_merge_fraction()}};
}

inline json to_json(const MemoryFootprint& m) {
    return json{{"input_bytes", m.input_bytes},
                {"wq_bytes", m.wq_bytes},
                {"wk_bytes", m.wk_bytes},
                {"wv_bytes", m.wv_bytes},
                {"w_msa_bytes", m.w_msa_bytes},
                {"w_fc1_bytes", m.w_fc1_bytes},
                {"w_fc2_bytes", m.w_fc2_bytes}};
}

inline json to_json(const DSEResult& r) {
    return json{{"k1", r.config.k1},
                {"k2", r.config.k2},
                {"k3", r.config.k3},
                {"k4", r.config.k4},
                {"mac_units", r.mac_units},
                {"total_cycles", r.total_cycles},
                {"hue", r.hue},
                {"hue_class", r.hue_class},
                {"fps", r.fps},
                {"bram_peak_bytes", r.bram_peak_bytes},
                {"balance_residual", r.residual.value()}};
}

} // namespace vita
