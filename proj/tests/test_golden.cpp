#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "vita/golden.hpp"
#include "vita/models.hpp"
#include "vita/quant.hpp"

using namespace vita;

namespace {

ModelSpec toy_model(std::int64_t layers = 2, std::int64_t d = 32, std::int64_t heads = 4) {
    ModelSpec m;
    m.name = "toy";
    m.patch_size = 16;
    m.stages = {StageSpec{layers, d, heads, 2 * d, 0, false}};
    return m;
}

} // namespace

TEST_CASE("float reference building blocks", "[golden]") {
    SECTION("matmul with bias") {
        FTensor a = make_ftensor({2, 2});
        a.data = {1, 2, 3, 4};
        FTensor b = make_ftensor({2, 1});
        b.data = {.5, .25};
        const FTensor c = fref::matmul(a, b, {1.0});
        CHECK(c.at(0, 0) == Catch::Approx(2.0));  // 0.5 + 0.5 + 1
        CHECK(c.at(1, 0) == Catch::Approx(3.5));  // 1.5 + 1.0 + 1
    }
    SECTION("softmax rows sum to one and order-preserve") {
        FTensor x = make_ftensor({1, 3});
        x.data = {1.0, 2.0, 3.0};
        const FTensor s = fref::softmax_rows(x, 0.5);
        CHECK(s.at(0, 0) + s.at(0, 1) + s.at(0, 2) == Catch::Approx(1.0));
        CHECK(s.at(0, 0) < s.at(0, 1));
        CHECK(s.at(0, 1) < s.at(0, 2));
    }
    SECTION("layernorm normalizes to zero mean unit variance") {
        FTensor x = make_ftensor({1, 4});
        x.data = {1.0, 2.0, 3.0, 4.0};
        const FTensor y = fref::layernorm_rows(x, std::vector<double>(4, 1.0),
                                               std::vector<double>(4, 0.0));
        double mean = 0, var = 0;
        for (auto v : y.data) mean += v;
        mean /= 4;
        for (auto v : y.data) var += (v - mean) * (v - mean);
        var /= 4;
        CHECK(mean == Catch::Approx(0.0).margin(1e-12));
        CHECK(var == Catch::Approx(1.0).margin(1e-2)); // eps shifts it slightly
    }
}

TEST_CASE("calibration freezes one scale plan per layer", "[golden]") {
    const ModelSpec model = toy_model(3);
    TestModel tm = make_test_model(model, 8, 21);
    REQUIRE(tm.weights.plan.size() == 3);
    for (const auto& p : tm.weights.plan) {
        CHECK(p.q_out > 0);
        CHECK(p.k_out > 0);
        CHECK(p.v_out > 0);
        CHECK(p.score_out > 0);
        CHECK(p.softmax_out == 1.0 / 127.0);
        CHECK(p.fc2_out > 0);
        CHECK(p.res2_out > 0);
    }
    SECTION("recalibration is deterministic") {
        TestModel tm2 = make_test_model(model, 8, 21);
        for (std::size_t l = 0; l < 3; ++l) {
            CHECK(tm.weights.plan[l].q_out == tm2.weights.plan[l].q_out);
            CHECK(tm.weights.plan[l].fc1_out == tm2.weights.plan[l].fc1_out);
        }
    }
    SECTION("integer biases are the real biases divided by the acc scale") {
        const LayerWeights& lw = tm.weights.layers[0];
        REQUIRE_FALSE(lw.bq.empty());
        // accumulators hold values at scale (in_scale * w_scale); the frozen
        // int32 bias must be the real bias requantized into that scale
        const double acc_scale = tm.weights.plan[0].ln1_out * lw.wq.scale;
        for (std::size_t j = 0; j < lw.bq.size(); ++j) {
            const double want = lw.bq_real[j] / acc_scale;
            CHECK(std::abs(double(lw.bq[j]) - want) <= 0.5 + 1e-9);
        }
    }
}

TEST_CASE("golden int8 model tracks the float reference", "[golden]") {
    const ModelSpec model = toy_model();
    const TestModel tm = make_test_model(model, 8, 3);
    const QTensor q = golden_model(tm.input, tm.weights);
    const FTensor f = float_model(dequantize(tm.input), tm.weights);

    REQUIRE(q.dims == std::vector<std::int64_t>{8, 32});
    REQUIRE(f.dims == q.dims);
    CHECK(cosine_similarity(f, q) > 0.99);

    SECTION("golden path is deterministic") {
        const QTensor q2 = golden_model(tm.input, tm.weights);
        CHECK(q.data == q2.data);
        CHECK(q.scale == q2.scale);
    }
    SECTION("different seeds give different outputs") {
        const TestModel other = make_test_model(model, 8, 4);
        const QTensor q3 = golden_model(other.input, other.weights);
        CHECK(q.data != q3.data);
    }
}

TEST_CASE("quantization fidelity holds across seeds", "[golden]") {
    const ModelSpec model = toy_model(2, 32, 4);
    for (std::uint32_t seed : {0u, 1u, 2u, 5u, 9u}) {
        const TestModel tm = make_test_model(model, 8, seed);
        const QTensor q = golden_model(tm.input, tm.weights);
        const FTensor f = float_model(dequantize(tm.input), tm.weights);
        INFO("seed " << seed);
        CHECK(cosine_similarity(f, q) >= 0.99);
    }
}

TEST_CASE("float layer trace exposes the residual structure", "[golden]") {
    const ModelSpec model = toy_model(1);
    const TestModel tm = make_test_model(model, 4, 8);
    const FTensor in = dequantize(tm.input);
    const FloatLayerTrace tr = float_layer(in, tm.weights.layers[0], model.stages[0].heads);

    REQUIRE(tr.res2.dims == in.dims);
    REQUIRE(tr.res1.dims == in.dims);
    // residual adds: res1 = in + attention branch, res2 = res1 + mlp branch
    for (std::size_t i = 0; i < in.data.size(); ++i) {
        REQUIRE(tr.res1.data[i] == Catch::Approx(in.data[i] + tr.proj.data[i]));
        REQUIRE(tr.res2.data[i] == Catch::Approx(tr.res1.data[i] + tr.fc2.data[i]));
    }
}

TEST_CASE("cosine similarity is 1 for identical directions", "[golden]") {
    FTensor f = make_ftensor({1, 3});
    f.data = {1.0, 2.0, -1.0};
    QTensor q = make_qtensor({1, 3}, 0.5);
    q.data = {2, 4, -2};
    CHECK(cosine_similarity(f, q) == Catch::Approx(1.0));
    q.data = {-2, -4, 2};
    CHECK(cosine_similarity(f, q) == Catch::Approx(-1.0));
}
