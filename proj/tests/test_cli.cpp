#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridguard/cli.hpp"
#include "gridguard/grid.hpp"
#include "gridguard/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kKeyHex = "4242424242424242424242424242424242424242424242424242424242424242";

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = gridguard::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gridguard_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("gen: deterministic files, usage errors") {
    TempDir dir;
    auto a = run_cli({"gen", "--m", "64", "--seed", "7", "--out", dir.file("a.bin")});
    CHECK(a.code == 0);
    auto b = run_cli({"gen", "--m", "64", "--seed", "7", "--out", dir.file("b.bin")});
    CHECK(b.code == 0);
    CHECK(read_bytes(dir.file("a.bin")) == read_bytes(dir.file("b.bin")));
    CHECK(gridguard::load_grid_file(dir.file("a.bin")).n() == 4096);

    auto bad = run_cli({"gen", "--m", "63", "--out", dir.file("c.bin")});
    CHECK(bad.code == 4);
    CHECK(bad.err.find("power of 2") != std::string::npos);
}

TEST_CASE("corrupt: manifest matches the oracle diff and is reproducible") {
    TempDir dir;
    REQUIRE(run_cli({"gen", "--m", "16", "--seed", "3", "--out", dir.file("g.bin")}).code == 0);
    auto args = std::vector<std::string>{"corrupt",  "--in",   dir.file("g.bin"),
                                         "--out",    dir.file("c.bin"),
                                         "--shape",  "disc",
                                         "--at",     "8,8",
                                         "--radius", "3",
                                         "--seed",   "5",
                                         "--manifest", dir.file("m.json")};
    REQUIRE(run_cli(args).code == 0);

    json manifest = json::parse(read_bytes(dir.file("m.json")));
    gridguard::Grid original = gridguard::load_grid_file(dir.file("g.bin"));
    gridguard::Grid corrupted = gridguard::load_grid_file(dir.file("c.bin"));
    gridguard::DiffReport oracle = gridguard::brute_force_diff(corrupted, original);

    REQUIRE(manifest["count"].get<size_t>() == oracle.cells.size());
    std::vector<gridguard::CellCoord> cells;
    for (const auto& pair : manifest["cells"])
        cells.push_back({pair[0].get<uint32_t>(), pair[1].get<uint32_t>()});
    CHECK(gridguard::Region(std::move(cells)) == oracle.cells);

    // re-running with the same flags reproduces the corrupted file exactly
    auto args2 = args;
    args2[4] = dir.file("c2.bin");
    REQUIRE(run_cli(args2).code == 0);
    CHECK(read_bytes(dir.file("c.bin")) == read_bytes(dir.file("c2.bin")));
}

TEST_CASE("build: prints the digest count; adaptive misfits name the nearest sizes") {
    TempDir dir;
    REQUIRE(run_cli({"gen", "--m", "8", "--seed", "1", "--out", dir.file("g.bin")}).code == 0);

    auto quad = run_cli({"build", "--in", dir.file("g.bin"), "--store", "quad", "--out", dir.file("q.st"),
                         "--key", kKeyHex});
    CHECK(quad.code == 0);
    CHECK(quad.out == "149\n");

    auto boundary = run_cli({"build", "--in", dir.file("g.bin"), "--store", "boundary", "--out",
                             dir.file("b.st"), "--key", kKeyHex});
    CHECK(boundary.out == "330\n");

    REQUIRE(run_cli({"gen", "--m", "4", "--seed", "1", "--out", dir.file("g4.bin")}).code == 0);
    auto adaptive = run_cli({"build", "--in", dir.file("g4.bin"), "--store", "adaptive", "--out",
                             dir.file("a.st"), "--key", kKeyHex});
    CHECK(adaptive.code == 4);
    CHECK(adaptive.err.find("N=8") != std::string::npos);
    CHECK(adaptive.err.find("N=64") != std::string::npos);

    auto nokey = run_cli({"build", "--in", dir.file("g.bin"), "--store", "quad", "--out", dir.file("x.st")});
    if (std::getenv("GRIDGUARD_KEY") == nullptr) CHECK(nokey.code == 4);
}

TEST_CASE("detect: exit codes, json shape, hybrid with two stores") {
    TempDir dir;
    REQUIRE(run_cli({"gen", "--m", "16", "--seed", "9", "--out", dir.file("g.bin")}).code == 0);
    REQUIRE(run_cli({"corrupt", "--in", dir.file("g.bin"), "--out", dir.file("c.bin"), "--shape", "rect",
                     "--at", "5,5", "--size", "3x4", "--seed", "2", "--manifest", dir.file("m.json")})
                .code == 0);
    for (const char* variant : {"quad", "boundary", "sift", "sieve"})
        REQUIRE(run_cli({"build", "--in", dir.file("g.bin"), "--store", variant, "--out",
                         dir.file(std::string(variant) + ".st"), "--key", kKeyHex})
                    .code == 0);

    SUBCASE("clean grid exits 0") {
        auto r = run_cli({"detect", "--grid", dir.file("g.bin"), "--scheme", "quad", "--store",
                          dir.file("quad.st"), "--key", kKeyHex});
        CHECK(r.code == 0);
        CHECK(r.out.find("verdict: clean") != std::string::npos);
    }
    SUBCASE("corrupted grid exits 3 and reports a manifest cell") {
        auto r = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "quad", "--store",
                          dir.file("quad.st"), "--key", kKeyHex, "--json"});
        CHECK(r.code == 3);
        json j = json::parse(r.out);
        CHECK(j["verdict"] == "corrupted");
        CHECK(j["region"]["size"] == 12);
        json manifest = json::parse(read_bytes(dir.file("m.json")));
        CHECK(j["region"]["cells"] == manifest["cells"]);
        CHECK(j["meter"]["sig_verifications"].get<uint64_t>() > 0);
    }
    SUBCASE("hybrid takes both stores; sieve reports bounds") {
        auto r = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "hybrid", "--store",
                          dir.file("boundary.st"), "--store", dir.file("sift.st"), "--key", kKeyHex});
        CHECK(r.code == 3);
        auto sieve = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "sieve", "--store",
                              dir.file("sieve.st"), "--key", kKeyHex, "--json"});
        CHECK(sieve.code == 3);
        json j = json::parse(sieve.out);
        CHECK(j["approx"]["candidates"] == 12);
        CHECK(j["found_cell"].is_null());
    }
    SUBCASE("--no-spread stops at the found cell") {
        auto r = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "sift", "--store",
                          dir.file("sift.st"), "--key", kKeyHex, "--no-spread", "--json"});
        CHECK(r.code == 3);
        json j = json::parse(r.out);
        CHECK_FALSE(j["found_cell"].is_null());
        CHECK(j["region"].is_null());
    }
    SUBCASE("prob needs the original, works without stores") {
        auto r = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "prob", "--original",
                          dir.file("g.bin"), "--seed", "4"});
        CHECK(r.code == 3);
        auto missing = run_cli({"detect", "--grid", dir.file("c.bin"), "--scheme", "prob"});
        CHECK(missing.code == 4);
    }
    SUBCASE("store/grid mismatch is a runtime error") {
        REQUIRE(run_cli({"gen", "--m", "8", "--seed", "1", "--out", dir.file("small.bin")}).code == 0);
        auto r = run_cli({"detect", "--grid", dir.file("small.bin"), "--scheme", "quad", "--store",
                          dir.file("quad.st"), "--key", kKeyHex});
        CHECK(r.code == 4);
    }
}

TEST_CASE("bench: deterministic CSV with the promised header") {
    auto args = std::vector<std::string>{"bench",   "--m-list", "16",        "--c-list", "2,8",
                                         "--shapes", "rect,disc", "--schemes", "improved,sift,prob",
                                         "--runs",  "3",        "--seed",    "5"};
    auto a = run_cli(args);
    auto b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    std::istringstream lines(a.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "scheme,m,N,shape,C,seed,sig_verifications,cells_touched,hash_computations,trials,wall_ms");
    size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 3 * 1 * 2 * 2 * 3);  // schemes * m * shapes * C * runs

    auto empty = run_cli({"bench", "--schemes", "", "--runs", "0"});
    CHECK(empty.code == 4);
}
