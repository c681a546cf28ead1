#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "vita/dataflow.hpp"
#include "vita/models.hpp"
#include "vita/perf.hpp"
#include "vita/workload.hpp"

using namespace vita;

namespace {

Workload small_vit(std::int64_t edge = 64) {
    return build_workload(builtin_model("vit_b16"), {edge, edge, 3});
}

} // namespace

TEST_CASE("schedules satisfy the structural invariants", "[trace]") {
    const Workload w = small_vit();
    const AcceleratorSpec spec;
    const ScheduleTrace t = build_schedule(w, spec);

    REQUIRE_FALSE(t.events.empty());
    for (const auto& e : t.events) {
        CHECK(e.start >= 0);
        CHECK(e.end >= e.start);
    }
    CHECK_NOTHROW(t.check_engine_exclusive());
    CHECK_NOTHROW(t.check_fetch_before_compute());

    SECTION("total fetched bytes equal the workload weight traffic") {
        CHECK(t.fetch_bytes() == w.total_weight_bytes());
    }
    SECTION("span covers every event and the declared end") {
        std::int64_t hi = 0;
        for (const auto& e : t.events) hi = std::max(hi, e.end);
        CHECK(t.span() == std::max(hi, t.declared_end));
    }
}

TEST_CASE("trace span equals the analytical cycle count", "[trace]") {
    for (const char* name : {"vit_b16", "deit_t"}) {
        const Workload w = build_workload(builtin_model(name), {64, 64, 3});
        const AcceleratorSpec spec;
        const ScheduleTrace t = build_schedule(w, spec);
        const PerfReport rep = analyze(w, spec);
        INFO(name);
        CHECK(t.span() == rep.total_cycles);
        CHECK_NOTHROW(validate_against_trace(rep, t, w, spec));
    }

    SECTION("agreement survives a bandwidth-stressed configuration") {
        AcceleratorSpec starved_ish;
        starved_ish.word_bytes = 1;
        starved_ish.dram_words_per_cycle = 1; // 1 B/cycle: stalls everywhere
        const Workload w = small_vit();
        const ScheduleTrace t = build_schedule(w, starved_ish);
        const PerfReport rep = analyze(w, starved_ish);
        CHECK(rep.phases.stall > 0);
        CHECK(t.span() == rep.total_cycles);
    }
    SECTION("agreement survives overhead knobs") {
        AcceleratorSpec spec;
        spec.ln_cycles_per_token = 3;
        spec.phase_drain_cycles = 5;
        const Workload w = small_vit();
        CHECK(build_schedule(w, spec).span() == analyze(w, spec).total_cycles);
    }
    SECTION("windowed multi-stage schedules agree too") {
        const Workload w = build_workload(builtin_model("swin_t"), {224, 224, 3});
        const AcceleratorSpec spec;
        CHECK(build_schedule(w, spec).span() == analyze(w, spec).total_cycles);
    }
}

TEST_CASE("schedule options shape the trace", "[trace]") {
    const Workload w = small_vit();
    const AcceleratorSpec spec;

    SECTION("fetch events can be suppressed without changing timing") {
        ScheduleOptions opts;
        opts.emit_fetch = false;
        const ScheduleTrace without = build_schedule(w, spec, opts);
        const ScheduleTrace with = build_schedule(w, spec);
        CHECK(without.span() == with.span());
        CHECK(without.fetch_bytes() == 0);
        CHECK(without.events.size() < with.events.size());
    }
    SECTION("overlapping the projection with the attention drain saves cycles") {
        ScheduleOptions opts;
        opts.overlap_proj = true;
        const ScheduleTrace overlapped = build_schedule(w, spec, opts);
        const ScheduleTrace serial = build_schedule(w, spec);
        CHECK(overlapped.span() < serial.span());

        AnalyzeOptions aopts;
        aopts.overlap_proj = true;
        CHECK(overlapped.span() == analyze(w, spec, aopts).total_cycles);
    }
}

TEST_CASE("trace corruption is caught by the validator", "[trace]") {
    const Workload w = small_vit();
    const AcceleratorSpec spec;
    const PerfReport rep = analyze(w, spec);

    SECTION("a stretched span") {
        ScheduleTrace t = build_schedule(w, spec);
        t.declared_end = rep.total_cycles + rep.total_cycles / 20; // +5%
        CHECK_THROWS_AS(validate_against_trace(rep, t, w, spec), ModelDivergenceError);
    }
    SECTION("overlapping lane events") {
        ScheduleTrace t = build_schedule(w, spec);
        // duplicate a compute event on the same lane at the same time
        for (const auto& e : t.events) {
            if (e.engine != Engine::fetch && e.end > e.start) {
                t.events.push_back(e);
                break;
            }
        }
        CHECK_THROWS_AS(t.check_engine_exclusive(), ModelDivergenceError);
    }
    SECTION("a compute event moved before its fetch") {
        ScheduleTrace t = build_schedule(w, spec);
        bool moved = false;
        for (auto& e : t.events) {
            if (e.engine == Engine::fetch && e.end > 0) {
                // find the matching compute event and drag it before the fetch
                for (auto& c : t.events) {
                    if (c.engine == e.consumer && c.layer == e.layer && c.head == e.head &&
                        c.index == e.index && c.start >= e.end) {
                        const std::int64_t len = c.end - c.start;
                        c.start = e.end - 1 - len;
                        c.end = e.end - 1;
                        moved = true;
                        break;
                    }
                }
            }
            if (moved) break;
        }
        REQUIRE(moved);
        CHECK_THROWS_AS(t.check_fetch_before_compute(), ModelDivergenceError);
    }
}

TEST_CASE("traces serialize to csv", "[trace]") {
    const Workload w = workload_for_tokens(builtin_model("deit_t"), 8);
    const ScheduleTrace t = build_schedule(w, AcceleratorSpec{});
    const auto file = std::filesystem::temp_directory_path() / "vita_test_trace.csv";
    t.save_csv(file);

    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "engine,layer,head,index,start,end,bytes");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == t.events.size());
    std::filesystem::remove(file);
}
