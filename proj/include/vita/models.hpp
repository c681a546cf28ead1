#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vita/errors.hpp"
#include "vita/toml_lite.hpp"

namespace vita {

// One encoder stage: `depth` identical layers at a fixed width. Global
// attention when window == 0; otherwise attention is restricted to
// window×window token tiles. patch_merge_in prepends a 4·D_prev → D
// downsampling matmul that also halves each token-grid side.
struct StageSpec {
    std::int64_t depth = 1;
    std::int64_t latent_dim = 0;   // D
    std::int64_t heads = 1;        // k
    std::int64_t mlp_hidden = 0;   // M
    std::int64_t window = 0;       // tokens per window side; 0 = global attention
    bool patch_merge_in = false;

    std::int64_t head_dim() const { return latent_dim / heads; }
};

struct ModelSpec {
    std::string name;
    std::int64_t patch_size = 16;
    bool include_class_token = false;
    std::vector<StageSpec> stages;

    void validate() const {
        if (patch_size <= 0) throw ShapeError("model: patch_size must be positive");
        if (stages.empty()) throw ShapeError("model: at least one stage required");
        for (const auto& s : stages) {
            if (s.depth < 0 || s.latent_dim <= 0 || s.heads < 1 || s.mlp_hidden <= 0)
                throw ShapeError("model: stage dims must be positive");
            if (s.latent_dim % s.heads != 0)
                throw ShapeError("model: latent_dim must be divisible by heads");
            if (s.window < 0) throw ShapeError("model: window must be non-negative");
        }
    }
};

struct ImageDims {
    std::int64_t height = 224;
    std::int64_t width = 224;
    std::int64_t channels = 3;
};

inline const std::vector<std::string>& builtin_model_names() {
    static const std::vector<std::string> names = {
        "vit_b16", "deit_b", "deit_s", "deit_t", "swin_t"};
    return names;
}

inline ModelSpec builtin_model(const std::string& name) {
    auto single_stage = [](std::string n, std::int64_t d, std::int64_t k, std::int64_t m) {
        ModelSpec spec;
        spec.name = std::move(n);
        spec.patch_size = 16;
        spec.stages = {StageSpec{12, d, k, m, 0, false}};
        return spec;
    };
    if (name == "vit_b16" || name == "deit_b") return single_stage(name, 768, 12, 3072);
    if (name == "deit_s") return single_stage(name, 384, 6, 1536);
    if (name == "deit_t") return single_stage(name, 192, 3, 768);
    if (name == "swin_t") {
        ModelSpec spec;
        spec.name = name;
        spec.patch_size = 4;
        spec.stages = {
            StageSpec{2, 96, 3, 384, 7, false},
            StageSpec{2, 192, 6, 768, 7, true},
            StageSpec{6, 384, 12, 1536, 7, true},
            StageSpec{2, 768, 24, 3072, 7, true},
        };
        return spec;
    }
    throw UnknownModelError("unknown model: " + name);
}

inline bool is_builtin_model(const std::string& name) {
    for (const auto& n : builtin_model_names())
        if (n == name) return true;
    return false;
}

// Model file format mirrors the struct field names:
//   name = "..."; patch_size = 16; include_class_token = false
//   [[stages]] with depth / latent_dim / heads / mlp_hidden / window /
//   patch_merge_in per stage.
inline ModelSpec model_from_toml(const toml::Table& t) {
    ModelSpec spec;
    spec.name = t.get_string("name", "custom");
    spec.patch_size = t.get_int("patch_size", 16);
    spec.include_class_token = t.get_bool("include_class_token", false);
    auto it = t.table_arrays.find("stages");
    if (it == t.table_arrays.end() || it->second.empty())
        throw ParseError("model file: at least one [[stages]] entry required");
    for (const auto& st : it->second) {
        StageSpec s;
        s.depth = st.get_int("depth", 1);
        s.latent_dim = st.get_int("latent_dim", 0);
        s.heads = st.get_int("heads", 1);
        s.mlp_hidden = st.get_int("mlp_hidden", 0);
        s.window = st.get_int("window", 0);
        s.patch_merge_in = st.get_bool("patch_merge_in", false);
        spec.stages.push_back(s);
    }
    spec.validate();
    return spec;
}

inline ModelSpec load_model_file(const std::string& path) {
    return model_from_toml(toml::parse_file(path));
}

} // namespace vita
