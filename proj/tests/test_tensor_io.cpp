#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>

#include "vita/golden.hpp"
#include "vita/models.hpp"
#include "vita/tensor.hpp"
#include "vita/weights.hpp"
#include "vita/weights_io.hpp"

using namespace vita;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir(const char* tag) : path(fs::temp_directory_path() / tag) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ModelSpec toy_model(std::int64_t layers = 2) {
    ModelSpec m;
    m.name = "toy";
    m.patch_size = 16;
    m.stages = {StageSpec{layers, 32, 4, 64, 0, false}};
    return m;
}

} // namespace

TEST_CASE("tensors are row-major with multiplicative trailing dims", "[tensor]") {
    QTensor q = make_qtensor({2, 3}, 0.5);
    CHECK(q.rows() == 2);
    CHECK(q.cols() == 3);
    CHECK(q.elem_count() == 6);
    CHECK(q.data.size() == 6);
    q.at(1, 2) = 9;
    CHECK(q.data[5] == 9);

    const QTensor q3 = make_qtensor({2, 3, 4}, 1.0);
    CHECK(q3.rows() == 2);
    CHECK(q3.cols() == 12);

    FTensor f = make_ftensor({3, 2});
    f.at(2, 1) = 1.5;
    CHECK(f.data[5] == 1.5);
}

TEST_CASE("qtensor files round-trip exactly", "[tensor][io]") {
    TempDir dir("vita_test_qtensor");
    QTensor t = make_qtensor({3, 5}, 0.031);
    for (std::size_t i = 0; i < t.data.size(); ++i)
        t.data[i] = static_cast<std::int8_t>(int(i) * 17 - 110);

    const fs::path file = dir.path / "t.vqt";
    save_qtensor(t, file);
    const QTensor back = load_qtensor(file);
    CHECK(back.dims == t.dims);
    CHECK(back.scale == t.scale);
    CHECK(back.data == t.data);

    SECTION("loading a missing file fails") {
        CHECK_THROWS_AS(load_qtensor(dir.path / "absent.vqt"), Error);
    }
}

TEST_CASE("weight bundles round-trip bit-exactly", "[weights][io]") {
    TempDir dir("vita_test_bundle");
    const ModelSpec model = toy_model();
    const TestModel tm = make_test_model(model, 4, 7);

    save_weight_bundle(tm.weights, dir.path);
    const ModelWeights back = load_weight_bundle(model, dir.path);

    REQUIRE(back.layers.size() == tm.weights.layers.size());
    REQUIRE(back.plan.size() == tm.weights.plan.size());
    for (std::size_t l = 0; l < back.layers.size(); ++l) {
        const LayerWeights& a = tm.weights.layers[l];
        const LayerWeights& b = back.layers[l];
        CHECK(a.wq.data == b.wq.data);
        CHECK(a.wq.scale == b.wq.scale);
        CHECK(a.wk.data == b.wk.data);
        CHECK(a.wv.data == b.wv.data);
        CHECK(a.w_msa.data == b.w_msa.data);
        CHECK(a.w_fc1.data == b.w_fc1.data);
        CHECK(a.w_fc2.data == b.w_fc2.data);
        CHECK(a.bq == b.bq);
        CHECK(a.bk == b.bk);
        CHECK(a.bv == b.bv);
        CHECK(a.b_msa == b.b_msa);
        CHECK(a.b_fc1 == b.b_fc1);
        CHECK(a.b_fc2 == b.b_fc2);
        CHECK(a.ln1_gamma == b.ln1_gamma);
        CHECK(a.ln2_beta == b.ln2_beta);
        const LayerScalePlan& pa = tm.weights.plan[l];
        const LayerScalePlan& pb = back.plan[l];
        CHECK(pa.q_out == pb.q_out);
        CHECK(pa.score_out == pb.score_out);
        CHECK(pa.fc2_out == pb.fc2_out);
    }

    SECTION("reloaded weights produce byte-identical golden outputs") {
        const QTensor a = golden_model(tm.input, tm.weights);
        const QTensor b = golden_model(tm.input, back);
        CHECK(a.data == b.data);
    }
    SECTION("loading from an empty directory fails") {
        TempDir empty("vita_test_bundle_empty");
        CHECK_THROWS_AS(load_weight_bundle(model, empty.path), Error);
    }
}

TEST_CASE("weight generation is deterministic in the seed", "[weights]") {
    const ModelSpec model = toy_model();
    const ModelWeights a = generate_weights(model, 42);
    const ModelWeights b = generate_weights(model, 42);
    const ModelWeights c = generate_weights(model, 43);
    REQUIRE(a.layers.size() == b.layers.size());
    CHECK(a.layers[0].wq.data == b.layers[0].wq.data);
    CHECK(a.layers[1].w_fc2.data == b.layers[1].w_fc2.data);
    CHECK(a.layers[0].b_fc1_real == b.layers[0].b_fc1_real);
    CHECK(a.layers[0].wq.data != c.layers[0].wq.data);

    SECTION("input generation is deterministic too") {
        CHECK(generate_input(8, 32, 5).data == generate_input(8, 32, 5).data);
        CHECK(generate_input(8, 32, 5).data != generate_input(8, 32, 6).data);
    }
    SECTION("per-layer streams differ") {
        CHECK(a.layers[0].wq.data != a.layers[1].wq.data);
        CHECK(a.layers[0].wq.data != a.layers[0].wk.data);
    }
}
