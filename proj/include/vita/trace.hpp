#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "vita/errors.hpp"

namespace vita {

// Simulated hardware lanes. qkv1..3 are the engine-1 PE blocks (Q, K, V
// columns); score/apply are the engine-2 blocks; pool is all five blocks
// fused for projection / MLP / patch-merge phases; fetch is the DRAM port.
enum class Engine {
    qkv1, qkv2, qkv3,
    score, apply,
    softmax, ln,
    pool,
    fetch,
};

inline const char* engine_name(Engine e) {
    switch (e) {
        case Engine::qkv1: return "QKV1";
        case Engine::qkv2: return "QKV2";
        case Engine::qkv3: return "QKV3";
        case Engine::score: return "SCORE";
        case Engine::apply: return "APPLY";
        case Engine::softmax: return "SOFTMAX";
        case Engine::ln: return "LN";
        case Engine::pool: return "POOL";
        case Engine::fetch: return "FETCH";
    }
    return "?";
}

struct TraceEvent {
    Engine engine = Engine::pool;
    std::int64_t layer = -1;
    std::int64_t head = -1;
    std::int64_t index = 0;       // column or row index within the phase
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::int64_t bytes = 0;       // fetch events only
    Engine consumer = Engine::pool; // fetch events: lane that uses the data
};

struct ScheduleTrace {
    std::vector<TraceEvent> events;
    std::int64_t declared_end = 0; // schedule end incl. trailing eventless drain

    std::int64_t span() const {
        std::int64_t hi = declared_end;
        for (const auto& e : events) hi = std::max(hi, e.end);
        return hi;
    }

    std::int64_t busy_cycles(Engine eng) const {
        std::int64_t total = 0;
        for (const auto& e : events)
            if (e.engine == eng) total += e.end - e.start;
        return total;
    }

    std::int64_t fetch_bytes() const {
        std::int64_t total = 0;
        for (const auto& e : events)
            if (e.engine == Engine::fetch) total += e.bytes;
        return total;
    }

    // Events of one lane must not overlap in time. Zero-length events are
    // prefetch markers (data already resident); they hold no lane time.
    void check_engine_exclusive() const {
        std::map<Engine, std::vector<const TraceEvent*>> lanes;
        for (const auto& e : events)
            if (e.end > e.start) lanes[e.engine].push_back(&e);
        for (auto& [eng, evs] : lanes) {
            std::sort(evs.begin(), evs.end(), [](const TraceEvent* a, const TraceEvent* b) {
                return a->start != b->start ? a->start < b->start : a->end < b->end;
            });
            for (std::size_t i = 1; i < evs.size(); ++i) {
                if (evs[i]->start < evs[i - 1]->end)
                    throw ModelDivergenceError(
                        std::string("trace: overlapping events on lane ") + engine_name(eng));
            }
        }
    }

    // Every compute event whose operands arrive by a fetch event must start
    // after that fetch completes (double-buffer legality).
    void check_fetch_before_compute() const {
        std::map<std::tuple<Engine, std::int64_t, std::int64_t, std::int64_t>, std::int64_t> ready;
        for (const auto& e : events)
            if (e.engine == Engine::fetch)
                ready[{e.consumer, e.layer, e.head, e.index}] = e.end;
        for (const auto& e : events) {
            if (e.engine == Engine::fetch) continue;
            auto it = ready.find({e.engine, e.layer, e.head, e.index});
            if (it != ready.end() && e.start < it->second)
                throw ModelDivergenceError("trace: compute starts before its operand fetch ends");
        }
    }

    void save_csv(const std::filesystem::path& path) const {
        std::ofstream os(path);
        if (!os) throw Error("cannot open trace file for write: " + path.string());
        os << "engine,layer,head,index,start,end,bytes\n";
        for (const auto& e : events)
            os << engine_name(e.engine) << ',' << e.layer << ',' << e.head << ','
               << e.index << ',' << e.start << ',' << e.end << ',' << e.bytes << '\n';
        if (!os) throw Error("trace write failed: " + path.string());
    }
};

} // namespace vita
