#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef VITA_CLI_PATH
#error "VITA_CLI_PATH must point at the built CLI binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(VITA_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
#ifdef _WIN32
    return status;
#else
    return WEXITSTATUS(status);
#endif
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "vita_test_cli") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const char* name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream(p) << content;
        return p;
    }
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

const char* kToyModel = R"(
name = "toy"
patch_size = 16

[[stages]]
depth = 2
latent_dim = 32
heads = 4
mlp_hidden = 64
)";

} // namespace

TEST_CASE("cli happy paths exit zero", "[cli]") {
    CHECK(run_cli("models") == 0);
    CHECK(run_cli("workload --model vit_b16 --image 256x256") == 0);
    CHECK(run_cli("workload --model swin_t --compare paper") == 0);
    CHECK(run_cli("perf --model deit_t --compare paper") == 0);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("perf --help") == 0);
}

TEST_CASE("cli verify reflects the bit-exactness contract", "[cli]") {
    TempDir dir;
    const fs::path model = dir.file("toy.toml", kToyModel);
    const std::string base = "verify --model-file " + model.string() + " --tokens 4 --seed 7";

    CHECK(run_cli(base) == 0);
    CHECK(run_cli(base + " --inject-fault") == 1);
    CHECK(run_cli("verify --model swin_t") == 2);
}

TEST_CASE("cli usage errors exit two", "[cli]") {
    CHECK(run_cli("workload --model nope") == 2);
    CHECK(run_cli("workload") == 2);                       // no model source
    CHECK(run_cli("perf --model vit_b16 --image 10x7") == 2);  // not patch-aligned
    CHECK(run_cli("perf --model vit_b16 --image banana") == 2);
    CHECK(run_cli("") == 2);                               // missing subcommand
    CHECK(run_cli("unknown-subcommand") == 2);
    CHECK(run_cli("workload --model vit_b16 --model-file x.toml") == 2);
    CHECK(run_cli("workload --model-file /nonexistent.toml") == 2);
}

TEST_CASE("cli domain failures exit one", "[cli]") {
    TempDir dir;
    const fs::path absurd = dir.file("absurd.toml", "k1 = 64\nk2 = 16\nk3 = 64\nk4 = 16\n");
    CHECK(run_cli("perf --model vit_b16 --image 256x256 --accel " + absurd.string()) == 1);

    const fs::path tiny = dir.file("tiny.toml", "lut_budget = 100\n");
    CHECK(run_cli("dse --model vit_b16 --image 256x256 --budget " + tiny.string()) == 1);
}

TEST_CASE("cli json reports share the envelope and round-trip", "[cli]") {
    TempDir dir;
    const fs::path out = dir.path / "report.json";

    SECTION("workload") {
        REQUIRE(run_cli("workload --model vit_b16 --image 256x256 --compare paper --json "
                        "--output " + out.string()) == 0);
        const json j = read_json(out);
        CHECK(j["command"] == "workload");
        CHECK(j["version"] == "1.0.0");
        CHECK(j["inputs"]["model"] == "vit_b16");
        CHECK(j["results"]["memory_footprint"]["input_bytes"] == 196608);
        CHECK(j["results"]["reference"].contains("msa_delta_pp"));
        // round-trip: serialize and reparse
        CHECK(json::parse(j.dump()) == j);
    }
    SECTION("perf") {
        REQUIRE(run_cli("perf --model vit_b16 --image 256x256 --json --output " +
                        out.string()) == 0);
        const json j = read_json(out);
        CHECK(j["command"] == "perf");
        CHECK(j["results"]["total_cycles"] == 66833256);
        CHECK(j["results"]["phases"]["qkv"] == 18874368);
        CHECK(j["results"]["hue"].get<double>() > 0.97);
    }
    SECTION("dse") {
        REQUIRE(run_cli("dse --model vit_b16 --image 256x256 --top 2 --json --output " +
                        out.string()) == 0);
        const json j = read_json(out);
        CHECK(j["command"] == "dse");
        REQUIRE(j["results"].size() == 2);
        CHECK(j["results"][0]["k1"] == 16);
        CHECK(j["results"][0]["k2"] == 6);
        CHECK(j["results"][0]["k3"] == 8);
        CHECK(j["results"][0]["k4"] == 4);
        CHECK(j["results"][0]["balance_residual"] == 0.0);
    }
    SECTION("verify") {
        const fs::path model = dir.file("toy.toml", kToyModel);
        REQUIRE(run_cli("verify --model-file " + model.string() +
                        " --tokens 4 --seed 7 --json --output " + out.string()) == 0);
        const json j = read_json(out);
        CHECK(j["command"] == "verify");
        CHECK(j["results"]["identical"] == true);
        CHECK(j["results"]["first_divergence"].is_null());
        CHECK(j["results"]["cosine_vs_float"].get<double>() > 0.99);
    }
}

TEST_CASE("cli dse table honors --top and --csv", "[cli]") {
    TempDir dir;
    const fs::path out = dir.path / "dse.csv";
    REQUIRE(run_cli("dse --model vit_b16 --image 256x256 --top 3 --csv --output " +
                    out.string()) == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("rank,k1,k2,k3,k4", 0) == 0);
    std::size_t rows = 0;
    std::string first;
    for (std::string line; std::getline(in, line);) {
        if (rows == 0) first = line;
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(first.rfind("1,16,6,8,4,", 0) == 0);
}

TEST_CASE("cli trace writes a csv schedule", "[cli]") {
    TempDir dir;
    const fs::path model = dir.file("toy.toml", kToyModel);
    const fs::path out = dir.path / "trace.csv";
    REQUIRE(run_cli("trace --model-file " + model.string() + " --image 64x16 --output " +
                    out.string()) == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "engine,layer,head,index,start,end,bytes,consumer");
    std::size_t rows = 0;
    bool has_fetch = false;
    for (std::string line; std::getline(in, line);) {
        ++rows;
        if (line.rfind("FETCH", 0) == 0) has_fetch = true;
    }
    CHECK(rows > 100);
    CHECK(has_fetch);
}
