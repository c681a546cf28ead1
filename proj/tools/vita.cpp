// vita: command-line driver for the simulator library.
//
// Commands: models, workload, verify, perf, dse, trace.
// Exit codes: 0 success, 1 domain failure (output mismatch, resource
// overflow, no feasible configuration), 2 usage error (unknown model,
// unsupported functional model, malformed inputs).

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vita/dataflow.hpp"
#include "vita/dse.hpp"
#include "vita/errors.hpp"
#include "vita/golden.hpp"
#include "vita/models.hpp"
#include "vita/perf.hpp"
#include "vita/reference_tables.hpp"
#include "vita/report_json.hpp"
#include "vita/toml_lite.hpp"
#include "vita/workload.hpp"

namespace {

using vita::json;

template <class... A>
std::string strf(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, a...);
    return std::string(buf);
}

struct CommonArgs {
    std::string model_name;
    std::string model_file;
    std::string image = "224x224";
    std::string accel_file;
    std::string output;
    std::string compare;
    std::uint32_t seed = 0;
    bool as_json = false;
};

void add_model_options(CLI::App* cmd, CommonArgs& args) {
    auto* by_name = cmd->add_option("--model", args.model_name, "builtin model name");
    auto* by_file = cmd->add_option("--model-file", args.model_file, "model spec TOML file");
    by_name->excludes(by_file);
}

void add_output_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_flag("--json", args.as_json, "emit a JSON report envelope");
    cmd->add_option("--output", args.output, "write the report to a file instead of stdout");
}

vita::ModelSpec resolve_model(const CommonArgs& args) {
    if (!args.model_file.empty()) return vita::load_model_file(args.model_file);
    if (!args.model_name.empty()) return vita::builtin_model(args.model_name);
    throw vita::UnknownModelError("no model given: pass --model or --model-file");
}

vita::ImageDims parse_image(const std::string& s) {
    vita::ImageDims img;
    img.channels = 3;
    const auto x = s.find_first_of("xX");
    try {
        if (x == std::string::npos) {
            img.height = img.width = std::stoll(s);
        } else {
            img.height = std::stoll(s.substr(0, x));
            img.width = std::stoll(s.substr(x + 1));
        }
    } catch (const std::exception&) {
        throw vita::ParseError("bad --image '" + s + "': expected HxW, e.g. 256x256");
    }
    if (img.height <= 0 || img.width <= 0)
        throw vita::ParseError("bad --image '" + s + "': dims must be positive");
    return img;
}

vita::AcceleratorSpec resolve_accel(const CommonArgs& args) {
    vita::AcceleratorSpec spec;
    if (!args.accel_file.empty()) spec = vita::load_accelerator_file(args.accel_file);
    spec.validate();
    return spec;
}

vita::ResourceBudget resolve_budget(const std::string& name) {
    if (name == "zc7020") return vita::zc7020_budget();
    if (name == "zcu102") return vita::zcu102_budget();
    // Anything else is a TOML file mirroring ResourceBudget field names.
    const vita::toml::Table t = vita::toml::parse_file(name);
    vita::ResourceBudget b;
    b.lut_budget = t.get_int("lut_budget", b.lut_budget);
    b.dsp_budget = t.get_int("dsp_budget", b.dsp_budget);
    b.bram_bytes = t.get_int("bram_bytes", b.bram_bytes);
    b.luts_per_mac = t.get_int("luts_per_mac", b.luts_per_mac);
    b.control_lut_reserve = t.get_float("control_lut_reserve", b.control_lut_reserve);
    return b;
}

// Every command renders one payload string; --output redirects it to a file.
int emit(const CommonArgs& args, const std::string& payload) {
    if (args.output.empty()) {
        std::fputs(payload.c_str(), stdout);
        if (!payload.empty() && payload.back() != '\n') std::fputc('\n', stdout);
        return 0;
    }
    std::ofstream out(args.output, std::ios::binary);
    if (!out) throw vita::Error("cannot open output file: " + args.output);
    out << payload;
    std::printf("wrote %zu bytes to %s\n", payload.size(), args.output.c_str());
    return 0;
}

json inputs_json(const CommonArgs& args, const vita::ModelSpec& model, const vita::ImageDims& img) {
    return json{{"model", model.name},
                {"image", strf("%lldx%lld", (long long)img.height, (long long)img.width)},
                {"seed", args.seed}};
}

// ---------------------------------------------------------------------------
// models

int cmd_models(const CommonArgs& args) {
    if (args.as_json) {
        json list = json::array();
        for (const auto& name : vita::builtin_model_names()) {
            const vita::ModelSpec m = vita::builtin_model(name);
            json stages = json::array();
            for (const auto& s : m.stages)
                stages.push_back(json{{"depth", s.depth},
                                      {"latent_dim", s.latent_dim},
                                      {"heads", s.heads},
                                      {"mlp_hidden", s.mlp_hidden},
                                      {"window", s.window},
                                      {"patch_merge_in", s.patch_merge_in}});
            list.push_back(json{{"name", m.name},
                                {"patch_size", m.patch_size},
                                {"include_class_token", m.include_class_token},
                                {"stages", stages}});
        }
        return emit(args, vita::report_envelope("models", json::object(), list).dump(2));
    }
    std::string text;
    for (const auto& name : vita::builtin_model_names()) {
        const vita::ModelSpec m = vita::builtin_model(name);
        text += strf("%-8s patch %lld", m.name.c_str(), (long long)m.patch_size);
        for (const auto& s : m.stages)
            text += strf("  [depth %lld D %lld heads %lld M %lld%s]", (long long)s.depth,
                         (long long)s.latent_dim, (long long)s.heads, (long long)s.mlp_hidden,
                         s.window ? strf(" win %lld", (long long)s.window).c_str() : "");
        text += "\n";
    }
    return emit(args, text);
}

// ---------------------------------------------------------------------------
// workload

int cmd_workload(const CommonArgs& args) {
    const vita::ModelSpec model = resolve_model(args);
    const vita::ImageDims img = parse_image(args.image);
    const vita::Workload w = vita::build_workload(model, img);
    const vita::MacBreakdown bd = vita::mac_breakdown(w);
    const vita::MemoryFootprint fp = vita::memory_footprint(model, img);
    const vita::ReferenceBreakdown* ref =
        args.compare == "paper" ? vita::find_reference_breakdown(model.name, img.height) : nullptr;

    if (args.as_json) {
        json stages = json::array();
        for (const auto& s : w.stages)
            stages.push_back(json{{"tokens", s.tokens},
                                  {"latent_dim", s.latent_dim},
                                  {"heads", s.heads},
                                  {"mlp_hidden", s.mlp_hidden},
                                  {"depth", s.depth},
                                  {"window", s.window}});
        json results{{"stages", stages},
                     {"mac_breakdown", vita::to_json(bd)},
                     {"memory_footprint", vita::to_json(fp)},
                     {"total_macs", w.total_macs()}};
        if (ref) {
            results["reference"] = json{
                {"msa_pct", ref->msa_pct},
                {"mlp_pct", ref->mlp_pct},
                {"pm_pct", ref->pm_pct},
                {"msa_delta_pp", 100.0 * bd.msa_fraction() - ref->msa_pct},
                {"mlp_delta_pp", 100.0 * bd.mlp_fraction() - ref->mlp_pct},
                {"pm_delta_pp", 100.0 * bd.patch_merge_fraction() - ref->pm_pct}};
        }
        return emit(args,
                    vita::report_envelope("workload", inputs_json(args, model, img), results).dump(2));
    }

    std::string text = strf("model %s  image %lldx%lld  patch %lld\n", model.name.c_str(),
                            (long long)img.height, (long long)img.width,
                            (long long)model.patch_size);
    for (std::size_t i = 0; i < w.stages.size(); ++i) {
        const auto& s = w.stages[i];
        text += strf("stage %zu: N %lld  D %lld  heads %lld  Dh %lld  M %lld  depth %lld", i,
                     (long long)s.tokens, (long long)s.latent_dim, (long long)s.heads,
                     (long long)s.head_dim, (long long)s.mlp_hidden, (long long)s.depth);
        text += s.window ? strf("  window %lld (%lld per layer)\n", (long long)s.window,
                                (long long)s.window_count)
                         : "  global attention\n";
    }
    text += strf("MACs: msa %lld (%.1f%%)  mlp %lld (%.1f%%)  patch_merge %lld (%.1f%%)\n",
                 (long long)bd.msa_macs, 100.0 * bd.msa_fraction(), (long long)bd.mlp_macs,
                 100.0 * bd.mlp_fraction(), (long long)bd.patch_merge_macs,
                 100.0 * bd.patch_merge_fraction());
    text += strf("memory: input %lld B  wq %lld  wk %lld  wv %lld  w_msa %lld  w_fc1 %lld  "
                 "w_fc2 %lld\n",
                 (long long)fp.input_bytes, (long long)fp.wq_bytes, (long long)fp.wk_bytes,
                 (long long)fp.wv_bytes, (long long)fp.w_msa_bytes, (long long)fp.w_fc1_bytes,
                 (long long)fp.w_fc2_bytes);
    if (args.compare == "paper") {
        if (ref)
            text += strf("reference: msa %.1f%% (delta %+.2f pp)  mlp %.1f%% (delta %+.2f pp)  "
                         "pm %.1f%% (delta %+.2f pp)\n",
                         ref->msa_pct, 100.0 * bd.msa_fraction() - ref->msa_pct, ref->mlp_pct,
                         100.0 * bd.mlp_fraction() - ref->mlp_pct, ref->pm_pct,
                         100.0 * bd.patch_merge_fraction() - ref->pm_pct);
        else
            text += "reference: no published row for this model/image\n";
    }
    return emit(args, text);
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const CommonArgs& args, std::int64_t tokens_override, bool inject_fault) {
    const vita::ModelSpec model = resolve_model(args);
    const vita::ImageDims img = parse_image(args.image);
    std::int64_t tokens = tokens_override;
    if (tokens <= 0) {
        // Functional runs take a flat token count; derive it from the image.
        tokens = vita::build_workload(model, img).stages.front().tokens;
    }
    // Fails fast with UnsupportedFunctionalModelError for windowed or
    // multi-stage models before any heavy work happens.
    (void)vita::workload_for_tokens(model, tokens);

    const vita::AcceleratorSpec spec = resolve_accel(args);
    const vita::TestModel tm = vita::make_test_model(model, tokens, args.seed);
    const vita::QTensor golden = vita::golden_model(tm.input, tm.weights);

    vita::ScheduleOptions opts;
    opts.inject_fault = inject_fault;
    const vita::VitaRunResult run = vita::run_model_vita(model, tm.weights, tm.input, spec, opts);
    const auto diverge = vita::first_divergence(golden, run.output);

    const vita::FTensor fref = vita::float_model(vita::dequantize(tm.input), tm.weights);
    const double cos = vita::cosine_similarity(fref, run.output);

    if (args.as_json) {
        json results{{"identical", !diverge.has_value()},
                     {"values", golden.data.size()},
                     {"cosine_vs_float", cos},
                     {"trace_events", run.trace.events.size()},
                     {"trace_span", run.trace.span()}};
        results["first_divergence"] =
            diverge ? json{diverge->first, diverge->second} : json(nullptr);
        json in = inputs_json(args, model, img);
        in["tokens"] = tokens;
        in["inject_fault"] = inject_fault;
        emit(args, vita::report_envelope("verify", in, results).dump(2));
        return diverge ? 1 : 0;
    }

    std::string text =
        strf("model %s  layers %zu  tokens %lld  D %lld  heads %lld  seed %u\n",
             model.name.c_str(), tm.weights.layers.size(), (long long)tokens,
             (long long)model.stages[0].latent_dim, (long long)model.stages[0].heads, args.seed);
    text += strf("trace: %zu events, span %lld cycles\n", run.trace.events.size(),
                 (long long)run.trace.span());
    text += strf("cosine vs float reference: %.6f\n", cos);
    if (diverge)
        text += strf("MISMATCH at (%lld, %lld): golden %d, pipeline %d\n",
                     (long long)diverge->first, (long long)diverge->second,
                     diverge->first >= 0 ? (int)golden.at(diverge->first, diverge->second) : 0,
                     diverge->first >= 0 ? (int)run.output.at(diverge->first, diverge->second) : 0);
    else
        text += strf("golden and pipeline outputs byte-identical (%zu values)\n",
                     golden.data.size());
    emit(args, text);
    return diverge ? 1 : 0;
}

// ---------------------------------------------------------------------------
// perf

json perf_reference_json(const vita::PerfReport& rep, const vita::ReferencePerf& ref) {
    return json{{"hue", ref.hue},
                {"fps", ref.fps},
                {"energy_j", ref.energy_j},
                {"hue_delta_pp", 100.0 * (rep.hue - ref.hue)},
                {"fps_delta_pct", 100.0 * (rep.fps - ref.fps) / ref.fps},
                {"energy_delta_j", rep.energy_j - ref.energy_j}};
}

int cmd_perf(const CommonArgs& args, bool overlap_proj) {
    const vita::ModelSpec model = resolve_model(args);
    const vita::ImageDims img = parse_image(args.image);
    const vita::Workload w = vita::build_workload(model, img);
    const vita::AcceleratorSpec spec = resolve_accel(args);
    vita::AnalyzeOptions opts;
    opts.overlap_proj = overlap_proj;
    const vita::PerfReport rep = vita::analyze(w, spec, opts);
    const vita::ReferencePerf* ref =
        args.compare == "paper" ? vita::find_reference_perf(model.name, img.height) : nullptr;

    if (args.as_json) {
        json results = vita::to_json(rep);
        if (ref) results["reference"] = perf_reference_json(rep, *ref);
        json in = inputs_json(args, model, img);
        in["tile"] = spec.config_string();
        return emit(args, vita::report_envelope("perf", in, results).dump(2));
    }

    std::string text = strf("model %s  image %lldx%lld  tile %s  U %lld\n", model.name.c_str(),
                            (long long)img.height, (long long)img.width,
                            spec.config_string().c_str(), (long long)rep.mac_units);
    text += strf("total cycles   %lld\n", (long long)rep.total_cycles);
    text += strf("  qkv          %lld\n", (long long)rep.phases.qkv);
    text += strf("  attn         %lld\n", (long long)rep.phases.attn);
    text += strf("  msa_proj     %lld\n", (long long)rep.phases.msa_proj);
    text += strf("  mlp          %lld\n", (long long)rep.phases.mlp);
    text += strf("  patch_merge  %lld\n", (long long)rep.phases.patch_merge);
    text += strf("  overhead     %lld\n", (long long)rep.phases.overhead);
    text += strf("  stall        %lld\n", (long long)rep.phases.stall);
    text += strf("HUE            %.4f\n", rep.hue);
    text += strf("fps            %.4f\n", rep.fps);
    text += strf("energy/frame   %.4f J\n", rep.energy_j);
    text += strf("DRAM traffic   %lld B (avg %.4f B/cycle, peak %.4f B/cycle)\n",
                 (long long)rep.traffic_bytes, rep.avg_bytes_per_cycle, rep.peak_bytes_per_cycle);
    text += strf("BRAM peak      %lld B\n", (long long)rep.bram_peak_bytes);
    if (rep.starved) text += "WARNING: zero DRAM bandwidth with nonzero weight traffic\n";
    if (ref)
        text += strf("reference: HUE %.3f (delta %+.2f pp)  fps %.2f (delta %+.1f%%)  "
                     "energy %.3f J (delta %+.4f)\n",
                     ref->hue, 100.0 * (rep.hue - ref->hue), ref->fps,
                     100.0 * (rep.fps - ref->fps) / ref->fps, ref->energy_j,
                     rep.energy_j - ref->energy_j);
    else if (args.compare == "paper")
        text += "reference: no published row for this model/image\n";
    return emit(args, text);
}

// ---------------------------------------------------------------------------
// dse

int cmd_dse(const CommonArgs& args, const std::string& budget_name, int top, int threads,
            bool as_csv, bool overlap_proj) {
    const vita::ModelSpec model = resolve_model(args);
    const vita::ImageDims img = parse_image(args.image);
    const vita::Workload w = vita::build_workload(model, img);
    const vita::ResourceBudget budget = resolve_budget(budget_name);
    vita::SearchOptions opts;
    opts.threads = threads;
    opts.analyze.overlap_proj = overlap_proj;
    const std::vector<vita::DSEResult> ranked =
        vita::search_optimal(w, resolve_accel(args), budget, opts);
    const std::size_t n = std::min<std::size_t>(ranked.size(), top > 0 ? (std::size_t)top : 10);

    if (args.as_json) {
        json rows = json::array();
        for (std::size_t i = 0; i < n; ++i) rows.push_back(vita::to_json(ranked[i]));
        json in = inputs_json(args, model, img);
        in["budget"] = budget_name;
        in["candidates"] = ranked.size();
        return emit(args, vita::report_envelope("dse", in, rows).dump(2));
    }

    std::string text;
    if (as_csv) {
        text = "rank,k1,k2,k3,k4,mac_units,hue_class,total_cycles,hue,fps,bram_peak_bytes,"
               "balance_residual\n";
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = ranked[i];
            text += strf("%zu,%lld,%lld,%lld,%lld,%lld,%d,%lld,%.6f,%.4f,%lld,%.6f\n", i + 1,
                         (long long)r.config.k1, (long long)r.config.k2, (long long)r.config.k3,
                         (long long)r.config.k4, (long long)r.mac_units, r.hue_class,
                         (long long)r.total_cycles, r.hue, r.fps, (long long)r.bram_peak_bytes,
                         r.residual.value());
        }
        return emit(args, text);
    }
    text = strf("%zu feasible configurations, top %zu:\n", ranked.size(), n);
    text += "rank  config          U    class  cycles        HUE     fps      residual\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ranked[i];
        text += strf("%-4zu  %-14s  %-4lld %-5d  %-12lld  %.4f  %-7.3f  %.6f\n", i + 1,
                     r.config.to_string().c_str(), (long long)r.mac_units, r.hue_class,
                     (long long)r.total_cycles, r.hue, r.fps, r.residual.value());
    }
    return emit(args, text);
}

// ---------------------------------------------------------------------------
// trace

int cmd_trace(const CommonArgs& args, bool overlap_proj) {
    const vita::ModelSpec model = resolve_model(args);
    const vita::ImageDims img = parse_image(args.image);
    const vita::Workload w = vita::build_workload(model, img);
    const vita::AcceleratorSpec spec = resolve_accel(args);
    vita::ScheduleOptions opts;
    opts.overlap_proj = overlap_proj;
    const vita::ScheduleTrace trace = vita::build_schedule(w, spec, opts);

    std::string csv = "engine,layer,head,index,start,end,bytes,consumer\n";
    for (const auto& e : trace.events)
        csv += strf("%s,%lld,%lld,%lld,%lld,%lld,%lld,%s\n", vita::engine_name(e.engine),
                    (long long)e.layer, (long long)e.head, (long long)e.index,
                    (long long)e.start, (long long)e.end, (long long)e.bytes,
                    e.engine == vita::Engine::fetch ? vita::engine_name(e.consumer) : "");
    if (!args.output.empty()) {
        std::ofstream out(args.output, std::ios::binary);
        if (!out) throw vita::Error("cannot open output file: " + args.output);
        out << csv;
        std::printf("model %s: %zu events, span %lld cycles; trace written to %s\n",
                    model.name.c_str(), trace.events.size(), (long long)trace.span(),
                    args.output.c_str());
        return 0;
    }
    std::fputs(csv.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale simulator for a vision-transformer edge accelerator"};
    app.require_subcommand(1);

    CommonArgs args;
    std::int64_t tokens_override = 0;
    bool inject_fault = false;
    bool overlap_proj = false;
    std::string budget_name = "zc7020";
    int top = 10;
    int threads = 0;
    bool as_csv = false;

    CLI::App* c_models = app.add_subcommand("models", "list builtin model presets");
    add_output_options(c_models, args);

    CLI::App* c_workload =
        app.add_subcommand("workload", "MAC breakdown and memory footprint for a model");
    add_model_options(c_workload, args);
    add_output_options(c_workload, args);
    c_workload->add_option("--image", args.image, "input image as HxW (default 224x224)");
    c_workload->add_option("--compare", args.compare, "'paper' adds published-row deltas");

    CLI::App* c_verify = app.add_subcommand(
        "verify", "run golden reference and pipelined dataflow on seeded random weights");
    add_model_options(c_verify, args);
    add_output_options(c_verify, args);
    c_verify->add_option("--image", args.image, "input image as HxW (default 224x224)");
    c_verify->add_option("--tokens", tokens_override, "override token count (toy runs)");
    c_verify->add_option("--seed", args.seed, "weight/input generator seed (default 0)");
    c_verify->add_option("--accel", args.accel_file, "accelerator spec TOML file");
    c_verify->add_flag("--inject-fault", inject_fault,
                       "corrupt one output value (negative control)");

    CLI::App* c_perf = app.add_subcommand("perf", "cycle, HUE, fps, and bandwidth report");
    add_model_options(c_perf, args);
    add_output_options(c_perf, args);
    c_perf->add_option("--image", args.image, "input image as HxW (default 224x224)");
    c_perf->add_option("--accel", args.accel_file, "accelerator spec TOML file");
    c_perf->add_option("--compare", args.compare, "'paper' adds published-row deltas");
    c_perf->add_flag("--overlap-proj", overlap_proj,
                     "let the projection pool overlap the attention drain");

    CLI::App* c_dse = app.add_subcommand("dse", "enumerate and rank tile configurations");
    add_model_options(c_dse, args);
    add_output_options(c_dse, args);
    c_dse->add_option("--image", args.image, "input image as HxW (default 224x224)");
    c_dse->add_option("--budget", budget_name, "zc7020, zcu102, or a budget TOML file");
    c_dse->add_option("--accel", args.accel_file, "base accelerator spec TOML file");
    c_dse->add_option("--top", top, "rows to print (default 10)");
    c_dse->add_option("--threads", threads, "worker threads (default: VITA_SIM_THREADS or cores)");
    c_dse->add_flag("--csv", as_csv, "emit CSV rows instead of a table");
    c_dse->add_flag("--overlap-proj", overlap_proj,
                    "let the projection pool overlap the attention drain");

    CLI::App* c_trace = app.add_subcommand("trace", "dump the event schedule as CSV");
    add_model_options(c_trace, args);
    c_trace->add_option("--image", args.image, "input image as HxW (default 224x224)");
    c_trace->add_option("--accel", args.accel_file, "accelerator spec TOML file");
    c_trace->add_option("--output", args.output, "CSV destination (default stdout)");
    c_trace->add_flag("--overlap-proj", overlap_proj,
                      "let the projection pool overlap the attention drain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // 2 for any usage error; 0 covers --help
    }

    try {
        if (c_models->parsed()) return cmd_models(args);
        if (c_workload->parsed()) return cmd_workload(args);
        if (c_verify->parsed()) return cmd_verify(args, tokens_override, inject_fault);
        if (c_perf->parsed()) return cmd_perf(args, overlap_proj);
        if (c_dse->parsed()) return cmd_dse(args, budget_name, top, threads, as_csv, overlap_proj);
        if (c_trace->parsed()) return cmd_trace(args, overlap_proj);
    } catch (const vita::UnknownModelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::UnsupportedFunctionalModelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::EmptyWorkloadError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vita::Error& e) {
        // ResourceError, NoFeasibleConfigError, ModelDivergenceError,
        // OverflowRiskError: valid usage, failed domain checks.
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
