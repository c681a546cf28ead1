#include <catch2/catch_amalgamated.hpp>

#include <cstdint>

#include "vita/dataflow.hpp"
#include "vita/golden.hpp"
#include "vita/models.hpp"

using namespace vita;

namespace {

ModelSpec toy_model(std::int64_t layers, std::int64_t d, std::int64_t heads) {
    ModelSpec m;
    m.name = "toy";
    m.patch_size = 16;
    m.stages = {StageSpec{layers, d, heads, 2 * d, 0, false}};
    return m;
}

AcceleratorSpec toy_spec() {
    AcceleratorSpec s;
    s.k1 = 2;
    s.k2 = 2;
    s.k3 = 2;
    s.k4 = 2;
    return s;
}

} // namespace

TEST_CASE("pipelined dataflow is byte-identical to the golden reference", "[dataflow]") {
    const ModelSpec model = toy_model(2, 32, 4);
    const TestModel tm = make_test_model(model, 4, 7);
    const QTensor golden = golden_model(tm.input, tm.weights);
    const VitaRunResult run = run_model_vita(model, tm.weights, tm.input, toy_spec());

    CHECK(run.output.dims == golden.dims);
    CHECK(run.output.scale == golden.scale);
    CHECK(run.output.data == golden.data);
    CHECK_FALSE(first_divergence(golden, run.output).has_value());
    CHECK_FALSE(run.trace.events.empty());
}

TEST_CASE("byte identity holds across shapes, heads and tiles", "[dataflow]") {
    // small sweep; the acceptance suite runs the wide randomized version
    const std::int64_t shapes[][3] = {
        {3, 16, 1}, {5, 24, 2}, {8, 48, 3}, {12, 64, 4}, {7, 36, 2},
    };
    std::uint32_t seed = 100;
    for (const auto& sh : shapes) {
        const std::int64_t tokens = sh[0], d = sh[1], heads = sh[2];
        for (std::int64_t layers : {1, 2}) {
            const ModelSpec model = toy_model(layers, d, heads);
            const TestModel tm = make_test_model(model, tokens, seed++);
            const QTensor golden = golden_model(tm.input, tm.weights);
            AcceleratorSpec spec = toy_spec();
            spec.k1 = 1 + std::int64_t(seed % 3);
            spec.k4 = 1 + std::int64_t(seed % 2);
            const VitaRunResult run = run_model_vita(model, tm.weights, tm.input, spec);
            INFO("tokens " << tokens << " d " << d << " heads " << heads << " layers "
                           << layers);
            REQUIRE(run.output.data == golden.data);
        }
    }
}

TEST_CASE("fault injection makes the negative control diverge", "[dataflow]") {
    const ModelSpec model = toy_model(2, 32, 4);
    const TestModel tm = make_test_model(model, 4, 7);
    const QTensor golden = golden_model(tm.input, tm.weights);

    ScheduleOptions opts;
    opts.inject_fault = true;
    const VitaRunResult run = run_model_vita(model, tm.weights, tm.input, toy_spec(), opts);
    const auto div = first_divergence(golden, run.output);
    REQUIRE(div.has_value());
    CHECK(div->first == 0);
    CHECK(div->second == 0);

    SECTION("the fault flips exactly one stored value") {
        const VitaRunResult clean = run_model_vita(model, tm.weights, tm.input, toy_spec());
        int diffs = 0;
        for (std::size_t i = 0; i < clean.output.data.size(); ++i)
            if (clean.output.data[i] != run.output.data[i]) ++diffs;
        CHECK(diffs == 1);
    }
}

TEST_CASE("first_divergence reports coordinates or agreement", "[dataflow]") {
    QTensor a = make_qtensor({2, 3}, 1.0);
    QTensor b = make_qtensor({2, 3}, 1.0);
    CHECK_FALSE(first_divergence(a, b).has_value());

    b.at(1, 2) = 5;
    auto d = first_divergence(a, b);
    REQUIRE(d.has_value());
    CHECK(d->first == 1);
    CHECK(d->second == 2);

    SECTION("shape mismatch is flagged with (-1,-1)") {
        const QTensor c = make_qtensor({3, 2}, 1.0);
        auto m = first_divergence(a, c);
        REQUIRE(m.has_value());
        CHECK(m->first == -1);
        CHECK(m->second == -1);
    }
}

TEST_CASE("functional pipeline rejects unsupported models", "[dataflow]") {
    const TestModel tm = make_test_model(toy_model(1, 32, 4), 4, 1);

    SECTION("windowed attention") {
        ModelSpec m = toy_model(1, 32, 4);
        m.stages[0].window = 7;
        CHECK_THROWS_AS(workload_for_tokens(m, 49), UnsupportedFunctionalModelError);
        CHECK_THROWS_AS(run_model_vita(m, tm.weights, tm.input, toy_spec()),
                        UnsupportedFunctionalModelError);
    }
    SECTION("multi-stage models") {
        CHECK_THROWS_AS(workload_for_tokens(builtin_model("swin_t"), 49),
                        UnsupportedFunctionalModelError);
    }
    SECTION("uncalibrated weights") {
        ModelWeights raw = generate_weights(toy_model(1, 32, 4), 1);
        CHECK_THROWS_AS(run_model_vita(toy_model(1, 32, 4), raw, tm.input, toy_spec()), Error);
    }
}

TEST_CASE("workload_for_tokens builds a flat single-stage workload", "[dataflow]") {
    const Workload w = workload_for_tokens(toy_model(2, 32, 4), 4);
    REQUIRE(w.stages.size() == 1);
    CHECK(w.stages[0].tokens == 4);
    CHECK(w.stages[0].latent_dim == 32);
    CHECK(w.stages[0].depth == 2);

    SECTION("a class token never sneaks into functional runs") {
        ModelSpec m = toy_model(1, 32, 4);
        m.include_class_token = true;
        CHECK(workload_for_tokens(m, 4).stages[0].tokens == 4);
    }
}

TEST_CASE("run output scale matches the final layer plan", "[dataflow]") {
    const ModelSpec model = toy_model(2, 32, 4);
    const TestModel tm = make_test_model(model, 4, 19);
    const VitaRunResult run = run_model_vita(model, tm.weights, tm.input, toy_spec());
    CHECK(run.output.scale == tm.weights.plan.back().res2_out);
}
