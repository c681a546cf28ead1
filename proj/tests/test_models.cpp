#include <catch2/catch_amalgamated.hpp>

#include "vita/models.hpp"

using namespace vita;

TEST_CASE("builtin presets cover the evaluated models", "[models]") {
    const auto& names = builtin_model_names();
    REQUIRE(names.size() == 5);
    for (const auto& n : names) {
        CHECK(is_builtin_model(n));
        CHECK_NOTHROW(builtin_model(n).validate());
    }
    CHECK_FALSE(is_builtin_model("resnet50"));
}

TEST_CASE("vit_b16 and deit_b share the base encoder shape", "[models]") {
    for (const char* name : {"vit_b16", "deit_b"}) {
        const ModelSpec m = builtin_model(name);
        REQUIRE(m.stages.size() == 1);
        CHECK(m.patch_size == 16);
        CHECK(m.stages[0].depth == 12);
        CHECK(m.stages[0].latent_dim == 768);
        CHECK(m.stages[0].heads == 12);
        CHECK(m.stages[0].head_dim() == 64);
        CHECK(m.stages[0].mlp_hidden == 3072);
        CHECK(m.stages[0].window == 0);
    }
}

TEST_CASE("deit small and tiny scale the width down", "[models]") {
    const ModelSpec s = builtin_model("deit_s");
    CHECK(s.stages[0].latent_dim == 384);
    CHECK(s.stages[0].heads == 6);
    CHECK(s.stages[0].mlp_hidden == 1536);
    CHECK(s.stages[0].head_dim() == 64);

    const ModelSpec t = builtin_model("deit_t");
    CHECK(t.stages[0].latent_dim == 192);
    CHECK(t.stages[0].heads == 3);
    CHECK(t.stages[0].mlp_hidden == 768);
    CHECK(t.stages[0].head_dim() == 64);
}

TEST_CASE("swin_t is four windowed stages with patch merging", "[models]") {
    const ModelSpec m = builtin_model("swin_t");
    REQUIRE(m.stages.size() == 4);
    CHECK(m.patch_size == 4);
    const std::int64_t dims[] = {96, 192, 384, 768};
    const std::int64_t heads[] = {3, 6, 12, 24};
    const std::int64_t depth[] = {2, 2, 6, 2};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(m.stages[i].latent_dim == dims[i]);
        CHECK(m.stages[i].heads == heads[i]);
        CHECK(m.stages[i].depth == depth[i]);
        CHECK(m.stages[i].window == 7);
        CHECK(m.stages[i].mlp_hidden == 4 * dims[i]);
        CHECK(m.stages[i].patch_merge_in == (i > 0));
        CHECK(m.stages[i].head_dim() == 32);
    }
}

TEST_CASE("unknown model names are rejected", "[models]") {
    CHECK_THROWS_AS(builtin_model("nope"), UnknownModelError);
    CHECK_THROWS_AS(builtin_model(""), UnknownModelError);
}

TEST_CASE("model validation catches inconsistent stages", "[models]") {
    ModelSpec m = builtin_model("vit_b16");

    SECTION("latent dim must divide by heads") {
        m.stages[0].heads = 7;
        CHECK_THROWS_AS(m.validate(), ShapeError);
    }
    SECTION("dims must be positive") {
        m.stages[0].latent_dim = 0;
        CHECK_THROWS_AS(m.validate(), ShapeError);
    }
    SECTION("patch size must be positive") {
        m.patch_size = 0;
        CHECK_THROWS_AS(m.validate(), ShapeError);
    }
    SECTION("at least one stage") {
        m.stages.clear();
        CHECK_THROWS_AS(m.validate(), ShapeError);
    }
    SECTION("window must be non-negative") {
        m.stages[0].window = -1;
        CHECK_THROWS_AS(m.validate(), ShapeError);
    }
}
