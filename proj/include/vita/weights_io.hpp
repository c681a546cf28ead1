#pragma once

// Weight bundle on disk: one binary tensor file per weight matrix plus a
// JSON manifest listing paths and scales. Bias vectors, LayerNorm affine
// parameters and the per-layer scale plan are small and live inline in the
// manifest. A round-tripped bundle reproduces model outputs bit-exactly.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vita/models.hpp"
#include "vita/tensor.hpp"
#include "vita/weights.hpp"

namespace vita {

namespace detail {

inline nlohmann::json plan_to_json(const LayerScalePlan& p) {
    return nlohmann::json{
        {"ln1_out", p.ln1_out},   {"q_out", p.q_out},       {"k_out", p.k_out},
        {"v_out", p.v_out},       {"score_out", p.score_out}, {"softmax_out", p.softmax_out},
        {"sa_out", p.sa_out},     {"proj_out", p.proj_out}, {"res1_out", p.res1_out},
        {"ln2_out", p.ln2_out},   {"fc1_out", p.fc1_out},   {"gelu_out", p.gelu_out},
        {"fc2_out", p.fc2_out},   {"res2_out", p.res2_out},
    };
}

inline LayerScalePlan plan_from_json(const nlohmann::json& j) {
    LayerScalePlan p;
    p.ln1_out = j.at("ln1_out");
    p.q_out = j.at("q_out");
    p.k_out = j.at("k_out");
    p.v_out = j.at("v_out");
    p.score_out = j.at("score_out");
    p.softmax_out = j.at("softmax_out");
    p.sa_out = j.at("sa_out");
    p.proj_out = j.at("proj_out");
    p.res1_out = j.at("res1_out");
    p.ln2_out = j.at("ln2_out");
    p.fc1_out = j.at("fc1_out");
    p.gelu_out = j.at("gelu_out");
    p.fc2_out = j.at("fc2_out");
    p.res2_out = j.at("res2_out");
    return p;
}

} // namespace detail

// Writes <dir>/manifest.json plus one .vqt file per weight matrix.
inline void save_weight_bundle(const ModelWeights& mw, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["model"] = mw.model.name;
    manifest["layers"] = nlohmann::json::array();

    auto matrix_entry = [&](const QTensor& t, const std::string& file) {
        save_qtensor(t, dir / file);
        return nlohmann::json{{"file", file}, {"scale", t.scale}};
    };

    for (std::size_t l = 0; l < mw.layers.size(); ++l) {
        const LayerWeights& w = mw.layers[l];
        const std::string p = "layer" + std::to_string(l) + "_";
        nlohmann::json jl;
        jl["wq"] = matrix_entry(w.wq, p + "wq.vqt");
        jl["wk"] = matrix_entry(w.wk, p + "wk.vqt");
        jl["wv"] = matrix_entry(w.wv, p + "wv.vqt");
        jl["w_msa"] = matrix_entry(w.w_msa, p + "w_msa.vqt");
        jl["w_fc1"] = matrix_entry(w.w_fc1, p + "w_fc1.vqt");
        jl["w_fc2"] = matrix_entry(w.w_fc2, p + "w_fc2.vqt");
        jl["bq_real"] = w.bq_real;
        jl["bk_real"] = w.bk_real;
        jl["bv_real"] = w.bv_real;
        jl["b_msa_real"] = w.b_msa_real;
        jl["b_fc1_real"] = w.b_fc1_real;
        jl["b_fc2_real"] = w.b_fc2_real;
        jl["bq"] = w.bq;
        jl["bk"] = w.bk;
        jl["bv"] = w.bv;
        jl["b_msa"] = w.b_msa;
        jl["b_fc1"] = w.b_fc1;
        jl["b_fc2"] = w.b_fc2;
        jl["ln1_gamma"] = w.ln1_gamma;
        jl["ln1_beta"] = w.ln1_beta;
        jl["ln2_gamma"] = w.ln2_gamma;
        jl["ln2_beta"] = w.ln2_beta;
        if (l < mw.plan.size()) jl["plan"] = detail::plan_to_json(mw.plan[l]);
        manifest["layers"].push_back(std::move(jl));
    }

    std::ofstream os(dir / "manifest.json");
    if (!os) throw Error("cannot write manifest: " + (dir / "manifest.json").string());
    os << manifest.dump(2) << '\n';
    if (!os) throw Error("manifest write failed: " + (dir / "manifest.json").string());
}

// Loads a bundle produced by save_weight_bundle; `model` supplies shapes
// and must match the bundle's layer count.
inline ModelWeights load_weight_bundle(const ModelSpec& model, const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream is(manifest_path);
    if (!is) throw ParseError("cannot open manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        is >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest parse error: " + std::string(e.what()));
    }

    ModelWeights mw;
    mw.model = model;

    auto load_matrix = [&](const nlohmann::json& entry) {
        QTensor t = load_qtensor(dir / entry.at("file").get<std::string>());
        t.scale = entry.at("scale").get<double>();
        return t;
    };

    try {
        for (const auto& jl : manifest.at("layers")) {
            LayerWeights w;
            w.wq = load_matrix(jl.at("wq"));
            w.wk = load_matrix(jl.at("wk"));
            w.wv = load_matrix(jl.at("wv"));
            w.w_msa = load_matrix(jl.at("w_msa"));
            w.w_fc1 = load_matrix(jl.at("w_fc1"));
            w.w_fc2 = load_matrix(jl.at("w_fc2"));
            w.bq_real = jl.at("bq_real").get<std::vector<double>>();
            w.bk_real = jl.at("bk_real").get<std::vector<double>>();
            w.bv_real = jl.at("bv_real").get<std::vector<double>>();
            w.b_msa_real = jl.at("b_msa_real").get<std::vector<double>>();
            w.b_fc1_real = jl.at("b_fc1_real").get<std::vector<double>>();
            w.b_fc2_real = jl.at("b_fc2_real").get<std::vector<double>>();
            w.bq = jl.at("bq").get<std::vector<std::int32_t>>();
            w.bk = jl.at("bk").get<std::vector<std::int32_t>>();
            w.bv = jl.at("bv").get<std::vector<std::int32_t>>();
            w.b_msa = jl.at("b_msa").get<std::vector<std::int32_t>>();
            w.b_fc1 = jl.at("b_fc1").get<std::vector<std::int32_t>>();
            w.b_fc2 = jl.at("b_fc2").get<std::vector<std::int32_t>>();
            w.ln1_gamma = jl.at("ln1_gamma").get<std::vector<double>>();
            w.ln1_beta = jl.at("ln1_beta").get<std::vector<double>>();
            w.ln2_gamma = jl.at("ln2_gamma").get<std::vector<double>>();
            w.ln2_beta = jl.at("ln2_beta").get<std::vector<double>>();
            mw.layers.push_back(std::move(w));
            if (jl.contains("plan")) mw.plan.push_back(detail::plan_from_json(jl.at("plan")));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest field error: " + std::string(e.what()));
    }
    return mw;
}

} // namespace vita
