#include "gridguard/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>

#include "gridguard/detect.hpp"
#include "gridguard/grid.hpp"
#include "gridguard/hashstore.hpp"
#include "gridguard/rng.hpp"

namespace gridguard::cli {

namespace {

using nlohmann::json;

std::vector<uint8_t> parse_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw InvalidArgument("hex string must have even length");
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        throw InvalidArgument("invalid hex digit");
    };
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

// Key material for --key / GRIDGUARD_KEY (64 hex chars = 32 bytes). The hex
// is the MAC key itself or the Ed25519 seed, depending on mode.
std::vector<uint8_t> key_bytes_from(const std::string& key_flag, bool required) {
    std::string hex = key_flag;
    if (hex.empty()) {
        const char* env = std::getenv("GRIDGUARD_KEY");
        if (env) hex = env;
    }
    if (hex.empty()) {
        if (required) throw InvalidArgument("no key material: pass --key or set GRIDGUARD_KEY (64 hex chars)");
        return std::vector<uint8_t>(kKeySeedBytes, 0x47);  // fixed bench default
    }
    auto bytes = parse_hex(hex);
    if (bytes.size() != kKeySeedBytes) throw InvalidArgument("key material must be exactly 32 bytes of hex");
    return bytes;
}

KeyMaterial make_key(KeyMode mode, const std::string& key_flag, bool required) {
    auto bytes = key_bytes_from(key_flag, required);
    return mode == KeyMode::Mac ? KeyMaterial::mac(bytes) : KeyMaterial::signature_from_seed(bytes);
}

StoreVariant variant_from_name(const std::string& name) {
    for (StoreVariant v : {StoreVariant::Quad, StoreVariant::Boundary, StoreVariant::Sift, StoreVariant::Sieve,
                           StoreVariant::Adaptive})
        if (name == store_variant_name(v)) return v;
    throw InvalidArgument("unknown store variant: " + name);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

CellCoord parse_coord(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) throw InvalidArgument("expected row,col");
    return {static_cast<uint32_t>(std::stoul(text.substr(0, comma))),
            static_cast<uint32_t>(std::stoul(text.substr(comma + 1)))};
}

json meter_json(const CostMeter& meter) {
    return json{{"sig_verifications", meter.sig_verifications},
                {"cells_touched", meter.cells_touched},
                {"hash_computations", meter.hash_computations}};
}

json outcome_json(const DetectionOutcome& out, Scheme scheme) {
    json j;
    j["scheme"] = scheme_name(scheme);
    j["verdict"] = out.verdict == Verdict::Corrupted ? "corrupted" : "clean";
    if (out.found_cell)
        j["found_cell"] = json{{"row", out.found_cell->row}, {"col", out.found_cell->col}};
    else
        j["found_cell"] = nullptr;
    if (out.region) {
        json cells = json::array();
        for (CellCoord c : out.region->cells()) cells.push_back(json::array({c.row, c.col}));
        j["region"] = json{{"size", out.region->size()}, {"cells", std::move(cells)}};
    } else {
        j["region"] = nullptr;
    }
    if (out.approx) {
        j["approx"] = json{{"rows", out.approx->rows},
                           {"cols", out.approx->cols},
                           {"candidates", out.approx->candidate_count()}};
    } else {
        j["approx"] = nullptr;
    }
    j["trials"] = out.trials;
    j["meter"] = meter_json(out.meter);
    return j;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    uint32_t m = 0;
    uint32_t cell_size = 1;
    uint64_t seed = 0;
    std::string out_path;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    Grid grid = new_grid(a.m, a.cell_size, a.seed);
    uint64_t bytes = save_grid_file(grid, a.out_path);
    out << "wrote " << a.out_path << ": m=" << grid.m() << " cells=" << grid.n() << " bytes=" << bytes << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptArgs {
    std::string in_path, out_path, manifest_path;
    std::string shape = "rect";
    std::string at;    // "row,col"
    std::string size;  // "RxC" for rect
    uint32_t radius = 0;
    uint64_t count = 0;
    uint64_t seed = 0;
};

RegionShapeSpec shape_spec_from(const CorruptArgs& a) {
    RegionShapeSpec spec;
    spec.seed = a.seed;
    if (!a.at.empty()) spec.anchor = parse_coord(a.at);
    if (a.shape == "rect") {
        spec.kind = RegionKind::Rectangle;
        auto x = a.size.find('x');
        if (a.size.empty() || x == std::string::npos) throw InvalidArgument("rect shape needs --size RxC");
        spec.rows = static_cast<uint32_t>(std::stoul(a.size.substr(0, x)));
        spec.cols = static_cast<uint32_t>(std::stoul(a.size.substr(x + 1)));
    } else if (a.shape == "disc") {
        spec.kind = RegionKind::Disc;
        spec.radius = a.radius;
    } else if (a.shape == "random") {
        spec.kind = RegionKind::RandomConnected;
        spec.target = a.count;
    } else if (a.shape == "hvconvex") {
        spec.kind = RegionKind::HvConvexRandom;
        spec.target = a.count;
    } else {
        throw InvalidArgument("unknown shape: " + a.shape + " (rect|disc|random|hvconvex)");
    }
    return spec;
}

int cmd_corrupt(const CorruptArgs& a, std::ostream& out) {
    Grid grid = load_grid_file(a.in_path);
    Region region = generate_region(grid, shape_spec_from(a));
    Grid corrupted = inject_corruption(grid, region, mix_seed(a.seed, 0x0fu));
    save_grid_file(corrupted, a.out_path);
    if (!a.manifest_path.empty()) {
        json cells = json::array();
        for (CellCoord c : region.cells()) cells.push_back(json::array({c.row, c.col}));
        json manifest{{"m", grid.m()},        {"cell_size", grid.cell_size()}, {"shape", a.shape},
                      {"seed", a.seed},       {"count", region.size()},        {"cells", std::move(cells)}};
        std::ofstream mf(a.manifest_path);
        if (!mf) throw Error("cannot open " + a.manifest_path + " for writing");
        mf << manifest.dump(2) << "\n";
    }
    out << "corrupted " << region.size() << " cells -> " << a.out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
    std::string in_path, out_path;
    std::string variant = "quad";
    std::string mode = "mac";
    std::string key_hex;
};

Store build_variant(const Grid& grid, StoreVariant variant, const KeyMaterial& key) {
    switch (variant) {
        case StoreVariant::Quad: return build_quad_store(grid, key);
        case StoreVariant::Boundary: return build_boundary_store(grid, key);
        case StoreVariant::Sift: return build_sift_store(grid, key);
        case StoreVariant::Sieve: return build_layer_sieve(grid, key);
        case StoreVariant::Adaptive: return build_adaptive_tree(grid, key);
    }
    throw InvalidArgument("unknown store variant");
}

int cmd_build(const BuildArgs& a, std::ostream& out) {
    Grid grid = load_grid_file(a.in_path);
    KeyMode mode = a.mode == "sig" ? KeyMode::Signature : KeyMode::Mac;
    if (a.mode != "sig" && a.mode != "mac") throw InvalidArgument("--mode must be mac or sig");
    KeyMaterial key = make_key(mode, a.key_hex, /*required=*/true);
    Store store = build_variant(grid, variant_from_name(a.variant), key);
    save_store_file(store, a.out_path);
    out << store.digests().size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string grid_path, original_path;
    std::vector<std::string> store_paths;
    std::string scheme = "quad";
    std::string key_hex;
    uint64_t seed = 0;
    bool json_output = false;
    bool no_spread = false;
};

int cmd_detect(const DetectArgs& a, std::ostream& out) {
    Grid grid = load_grid_file(a.grid_path);
    auto scheme = scheme_from_name(a.scheme);
    if (!scheme) throw InvalidArgument("unknown scheme: " + a.scheme);

    std::optional<Grid> original;
    if (!a.original_path.empty()) original.emplace(load_grid_file(a.original_path));

    std::vector<Store> stores;
    stores.reserve(a.store_paths.size());
    StoreSet set;
    if (original) set.original = &*original;
    for (const auto& path : a.store_paths) {
        Store store = load_store_file(path);
        if (store.mode() == KeyMode::Mac) store.attach_key(make_key(KeyMode::Mac, a.key_hex, true));
        stores.push_back(std::move(store));
        const Store* p = &stores.back();
        const Store** slot = nullptr;
        switch (p->variant()) {
            case StoreVariant::Quad: slot = &set.quad; break;
            case StoreVariant::Boundary: slot = &set.boundary; break;
            case StoreVariant::Sift: slot = &set.sift; break;
            case StoreVariant::Sieve: slot = &set.sieve; break;
            case StoreVariant::Adaptive: slot = &set.adaptive; break;
        }
        if (*slot) throw InvalidArgument(std::string("duplicate ") + store_variant_name(p->variant()) + " store");
        *slot = p;
    }

    CostMeter meter;
    DetectionOutcome outcome = a.no_spread ? run_scheme(grid, set, *scheme, a.seed, meter)
                                           : locate_and_spread(grid, set, *scheme, a.seed, meter);

    if (a.json_output) {
        out << outcome_json(outcome, *scheme).dump(2) << "\n";
    } else {
        out << "verdict: " << (outcome.verdict == Verdict::Corrupted ? "corrupted" : "clean") << "\n";
        if (outcome.found_cell)
            out << "found cell: (" << outcome.found_cell->row << ", " << outcome.found_cell->col << ")\n";
        if (outcome.region) out << "region: " << outcome.region->size() << " cells\n";
        if (outcome.approx)
            out << "approx region: " << outcome.approx->rows.size() << " rows x " << outcome.approx->cols.size()
                << " cols (" << outcome.approx->candidate_count() << " candidates)\n";
        if (outcome.trials) out << "trials: " << outcome.trials << "\n";
        out << "meter: sig_verifications=" << outcome.meter.sig_verifications
            << " cells_touched=" << outcome.meter.cells_touched
            << " hash_computations=" << outcome.meter.hash_computations << "\n";
    }
    return outcome.verdict == Verdict::Corrupted ? 3 : 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string m_list = "64";
    std::string c_list = "1,4,16,64,256,1024";
    std::string shapes = "rect,disc";
    std::string schemes = "improved,sift,hybrid";
    uint32_t runs = 10;
    uint64_t seed = 0;
    std::string key_hex;
    std::string out_path;  // empty = stdout
    bool wall = false;
};

struct BenchStores {
    Grid grid;
    std::optional<Store> quad, boundary, sift, sieve, adaptive;
};

// Near-square factoring keeps rect instances comparable across C values.
std::pair<uint32_t, uint32_t> rect_dims(uint64_t c) {
    auto r = static_cast<uint32_t>(std::sqrt(static_cast<double>(c)));
    while (r > 1 && c % r != 0) --r;
    return {r, static_cast<uint32_t>(c / r)};
}

RegionShapeSpec bench_shape(const std::string& shape, uint64_t c, uint64_t seed) {
    RegionShapeSpec spec;
    spec.seed = seed;
    if (shape == "rect") {
        spec.kind = RegionKind::Rectangle;
        auto [rows, cols] = rect_dims(c);
        spec.rows = rows;
        spec.cols = cols;
    } else if (shape == "disc") {
        spec.kind = RegionKind::Disc;
        spec.radius = static_cast<uint32_t>(std::sqrt(static_cast<double>(c) / 3.14159265));
    } else if (shape == "random") {
        spec.kind = RegionKind::RandomConnected;
        spec.target = c;
    } else if (shape == "hvconvex") {
        spec.kind = RegionKind::HvConvexRandom;
        spec.target = c;
    } else {
        throw InvalidArgument("unknown shape: " + shape);
    }
    return spec;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    auto schemes = split_list(a.schemes);
    auto shapes = split_list(a.shapes);
    auto m_items = split_list(a.m_list);
    auto c_items = split_list(a.c_list);
    if (schemes.empty() || shapes.empty() || m_items.empty() || c_items.empty() || a.runs == 0)
        throw InvalidArgument("empty bench sweep");

    KeyMaterial key = make_key(KeyMode::Mac, a.key_hex, /*required=*/false);

    std::map<uint32_t, BenchStores> per_m;
    auto stores_for = [&](uint32_t m) -> BenchStores& {
        auto it = per_m.find(m);
        if (it == per_m.end())
            it = per_m.emplace(m, BenchStores{Grid::filled(m, 1, mix_seed(a.seed, m)), {}, {}, {}, {}, {}}).first;
        return it->second;
    };
    auto ensure_stores = [&](BenchStores& bs, Scheme scheme) {
        switch (scheme) {
            case Scheme::Quad:
                if (!bs.quad) bs.quad.emplace(build_quad_store(bs.grid, key));
                break;
            case Scheme::Improved:
                if (!bs.boundary) bs.boundary.emplace(build_boundary_store(bs.grid, key));
                break;
            case Scheme::Sift:
                if (!bs.sift) bs.sift.emplace(build_sift_store(bs.grid, key));
                break;
            case Scheme::Hybrid:
                if (!bs.boundary) bs.boundary.emplace(build_boundary_store(bs.grid, key));
                if (!bs.sift) bs.sift.emplace(build_sift_store(bs.grid, key));
                break;
            case Scheme::Sieve:
                if (!bs.sieve) bs.sieve.emplace(build_layer_sieve(bs.grid, key));
                break;
            case Scheme::Adaptive:
                if (!bs.adaptive) bs.adaptive.emplace(build_adaptive_tree(bs.grid, key));
                break;
            case Scheme::Probabilistic: break;
        }
    };

    std::ofstream file;
    std::ostream* sink = &out;
    if (!a.out_path.empty()) {
        file.open(a.out_path);
        if (!file) throw Error("cannot open " + a.out_path + " for writing");
        sink = &file;
    }
    *sink << "scheme,m,N,shape,C,seed,sig_verifications,cells_touched,hash_computations,trials,wall_ms\n";

    for (const auto& scheme_name_str : schemes) {
        auto scheme = scheme_from_name(scheme_name_str);
        if (!scheme) throw InvalidArgument("unknown scheme: " + scheme_name_str);
        for (const auto& m_str : m_items) {
            const auto m = static_cast<uint32_t>(std::stoul(m_str));
            BenchStores& bs = stores_for(m);
            ensure_stores(bs, *scheme);
            for (size_t shape_idx = 0; shape_idx < shapes.size(); ++shape_idx) {
                for (const auto& c_str : c_items) {
                    const uint64_t c_target = std::stoull(c_str);
                    for (uint32_t run = 0; run < a.runs; ++run) {
                        // Instance derivation is scheme-independent, so every
                        // scheme sees the same corrupted grids.
                        uint64_t rseed = mix_seed(mix_seed(mix_seed(mix_seed(a.seed, m), shape_idx), c_target), run);
                        Region region = generate_region(bs.grid, bench_shape(shapes[shape_idx], c_target, rseed));
                        Grid corrupted = inject_corruption(bs.grid, region, mix_seed(rseed, 0xc0));

                        StoreSet set;
                        set.original = &bs.grid;
                        if (bs.quad) set.quad = &*bs.quad;
                        if (bs.boundary) set.boundary = &*bs.boundary;
                        if (bs.sift) set.sift = &*bs.sift;
                        if (bs.sieve) set.sieve = &*bs.sieve;
                        if (bs.adaptive) set.adaptive = &*bs.adaptive;

                        CostMeter meter;
                        DetectionOutcome outcome;
                        auto start = std::chrono::steady_clock::now();
                        switch (*scheme) {
                            case Scheme::Probabilistic:
                                outcome = detect_probabilistic(corrupted, bs.grid, mix_seed(rseed, 0xb1), meter);
                                break;
                            case Scheme::Quad: outcome = detect_quad(corrupted, *set.quad, meter); break;
                            case Scheme::Improved: outcome = detect_improved(corrupted, *set.boundary, meter); break;
                            case Scheme::Sift: outcome = detect_sift_2d(corrupted, *set.sift, meter); break;
                            case Scheme::Hybrid:
                                outcome = detect_hybrid(corrupted, *set.boundary, *set.sift, meter);
                                break;
                            case Scheme::Sieve: outcome = detect_sieve(corrupted, *set.sieve, meter); break;
                            case Scheme::Adaptive: outcome = detect_adaptive(corrupted, *set.adaptive, meter); break;
                        }
                        auto stop = std::chrono::steady_clock::now();

                        *sink << scheme_name_str << ',' << m << ',' << uint64_t{m} * m << ','
                              << shapes[shape_idx] << ',' << region.size() << ',' << rseed << ','
                              << outcome.meter.sig_verifications << ',' << outcome.meter.cells_touched << ','
                              << outcome.meter.hash_computations << ',' << outcome.trials << ',';
                        if (a.wall) {
                            // informational only; omitted by default so repeated
                            // runs stay byte-identical
                            std::chrono::duration<double, std::milli> ms = stop - start;
                            *sink << ms.count();
                        }
                        *sink << '\n';
                    }
                }
            }
        }
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"corrupted-area localization over authenticated 2-D grids"};
    app.name("gridguard");
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a deterministic grid file");
    gen_cmd->add_option("--m", gen.m, "side length (power of 2)")->required();
    gen_cmd->add_option("--cell-size", gen.cell_size, "bytes per cell");
    gen_cmd->add_option("--seed", gen.seed, "fill seed");
    gen_cmd->add_option("--out", gen.out_path, "output grid file")->required();

    CorruptArgs corrupt;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "inject a corrupted region into a grid file");
    corrupt_cmd->add_option("--in", corrupt.in_path, "input grid file")->required();
    corrupt_cmd->add_option("--out", corrupt.out_path, "output grid file")->required();
    corrupt_cmd->add_option("--manifest", corrupt.manifest_path, "write the injected cell set as JSON");
    corrupt_cmd->add_option("--shape", corrupt.shape, "rect|disc|random|hvconvex");
    corrupt_cmd->add_option("--at", corrupt.at, "anchor cell row,col (random placement if omitted)");
    corrupt_cmd->add_option("--size", corrupt.size, "rect extent RxC");
    corrupt_cmd->add_option("--radius", corrupt.radius, "disc radius");
    corrupt_cmd->add_option("--count", corrupt.count, "target cell count for random shapes");
    corrupt_cmd->add_option("--seed", corrupt.seed, "shape/placement/mask seed");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "build a signed-hash store for a grid");
    build_cmd->add_option("--in", build.in_path, "input grid file")->required();
    build_cmd->add_option("--out", build.out_path, "output store file")->required();
    build_cmd->add_option("--store", build.variant, "quad|boundary|sift|sieve|adaptive")->required();
    build_cmd->add_option("--mode", build.mode, "mac|sig");
    build_cmd->add_option("--key", build.key_hex, "key material, 64 hex chars (or GRIDGUARD_KEY)");

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "locate corruption in a grid");
    detect_cmd->add_option("--grid", detect.grid_path, "grid file to check")->required();
    detect_cmd->add_option("--scheme", detect.scheme, "prob|quad|improved|sift|hybrid|sieve|adaptive")->required();
    detect_cmd->add_option("--store", detect.store_paths, "store file(s); hybrid needs boundary and sift");
    detect_cmd->add_option("--original", detect.original_path, "pristine grid (prob scheme / spread)");
    detect_cmd->add_option("--seed", detect.seed, "sampling seed (prob scheme)");
    detect_cmd->add_option("--key", detect.key_hex, "MAC key, 64 hex chars (or GRIDGUARD_KEY)");
    detect_cmd->add_flag("--json", detect.json_output, "machine-readable output");
    detect_cmd->add_flag("--no-spread", detect.no_spread, "stop after the first corrupted cell");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "sweep schemes over instances, emit CSV");
    bench_cmd->add_option("--m-list", bench.m_list, "comma list of grid sides");
    bench_cmd->add_option("--c-list", bench.c_list, "comma list of corruption sizes");
    bench_cmd->add_option("--shapes", bench.shapes, "comma list of rect|disc|random|hvconvex");
    bench_cmd->add_option("--schemes", bench.schemes, "comma list of detection schemes");
    bench_cmd->add_option("--runs", bench.runs, "seeds per instance");
    bench_cmd->add_option("--seed", bench.seed, "base seed");
    bench_cmd->add_option("--key", bench.key_hex, "MAC key (fixed default if unset)");
    bench_cmd->add_option("--out", bench.out_path, "CSV path (stdout if omitted)");
    bench_cmd->add_flag("--wall", bench.wall, "fill the wall_ms column (non-deterministic)");

    std::vector<const char*> argv;
    argv.push_back("gridguard");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen, out);
        if (corrupt_cmd->parsed()) return cmd_corrupt(corrupt, out);
        if (build_cmd->parsed()) return cmd_build(build, out);
        if (detect_cmd->parsed()) return cmd_detect(detect, out);
        if (bench_cmd->parsed()) return cmd_bench(bench, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

}  // namespace gridguard::cli
