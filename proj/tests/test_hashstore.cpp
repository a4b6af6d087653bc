#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "gridguard/hashstore.hpp"

using namespace gridguard;

namespace {

const KeyMaterial kMac = KeyMaterial::from_seed(KeyMode::Mac, 10);

// Independent size oracles, unrolled straight from the defining recurrences.
uint64_t quad_recurrence(uint64_t n) {
    if (n == 1) return 1;
    return 4 + 4 * quad_recurrence(n / 4);
}

uint64_t boundary_recurrence(uint64_t n) {
    if (n == 1) return 1;
    auto root = static_cast<uint64_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return 2 + 4 * root + 4 * boundary_recurrence(n / 4);
}

// Cell coverage of every digest at one quad level must tile the grid.
bool level_tiles_grid(const Store& store, uint32_t side) {
    const uint32_t m = store.m();
    std::vector<int> cover(uint64_t{m} * m, 0);
    for (const auto& d : store.digests()) {
        const auto* rect = std::get_if<RectDesc>(&d.descriptor);
        if (!rect || rect->rows != side || rect->cols != side) continue;
        for_each_cell(d.descriptor, [&](CellCoord c) { ++cover[uint64_t{c.row} * m + c.col]; });
    }
    // single-cell digests appear twice (quadrant entry + base entry)
    const int want = side == 1 ? 2 : 1;
    return std::all_of(cover.begin(), cover.end(), [&](int v) { return v == want; });
}

}  // namespace

TEST_CASE("quad store size matches the recurrence and the closed form") {
    for (uint32_t m : {2u, 4u, 8u, 16u, 32u}) {
        Grid g = new_grid(m, 1, m);
        Store store = build_quad_store(g, kMac);
        const uint64_t n = g.n();
        CAPTURE(n);
        CHECK(store.digests().size() == quad_recurrence(n) + 1);      // +1 root
        CHECK(store.digests().size() == (7 * n - 4) / 3 + 1);         // closed form
        CHECK((7 * n - 4) % 3 == 0);
    }
}

TEST_CASE("quad store: frozen counts and level tiling") {
    Grid g = new_grid(8, 1, 0);
    Store store = build_quad_store(g, kMac);
    CHECK(store.digests().size() == 149);  // 148 + root
    for (uint32_t side : {8u, 4u, 2u, 1u}) CHECK(level_tiles_grid(store, side));

    CostMeter meter;
    CHECK(store.verify(g, store.digest_or_throw(RectDesc{0, 0, 8, 8}), meter));
}

TEST_CASE("boundary store size matches the recurrence") {
    const uint64_t frozen[] = {14, 74, 330};  // N = 4, 16, 64
    int i = 0;
    for (uint32_t m : {2u, 4u, 8u, 16u, 32u}) {
        Grid g = new_grid(m, 1, m);
        Store store = build_boundary_store(g, kMac);
        const uint64_t n = g.n();
        CAPTURE(n);
        CHECK(store.digests().size() == boundary_recurrence(n));
        if (i < 3) CHECK(store.digests().size() == frozen[i]);
        ++i;
        // space stays linear: s(N) <= 10 N - 2 sqrt(N)
        CHECK(store.digests().size() <= 10 * n - 2 * m);
    }
}

TEST_CASE("sift and sieve store sizes") {
    for (uint32_t m : {2u, 8u, 64u}) {
        Grid g = new_grid(m, 1, 1);
        CHECK(build_sift_store(g, kMac).digests().size() == g.n() + m);
        CHECK(build_layer_sieve(g, kMac).digests().size() == 2 * uint64_t{m});
    }
}

TEST_CASE("sift store verifies clean cells") {
    Grid g = new_grid(8, 1, 2);
    Store store = build_sift_store(g, kMac);
    CostMeter meter;
    CHECK(store.verify(g, store.digest_or_throw(single_cell_desc({3, 5})), meter));
    CHECK(store.verify(g, store.digest_or_throw(ColRunDesc{2, 0, 8}), meter));
}

TEST_CASE("sieve locality: a corrupted cell fails exactly its row and column") {
    Grid g = new_grid(8, 1, 3);
    Store store = build_layer_sieve(g, kMac);
    Grid bad = inject_corruption(g, Region({{2, 5}}), 7);
    CostMeter meter;
    for (uint32_t r = 0; r < 8; ++r)
        CHECK(store.verify(bad, store.digest_or_throw(RowRunDesc{r, 0, 8}), meter) == (r != 2));
    for (uint32_t c = 0; c < 8; ++c)
        CHECK(store.verify(bad, store.digest_or_throw(ColRunDesc{c, 0, 8}), meter) == (c != 5));
}

TEST_CASE("adaptive shape: conforming sizes") {
    AdaptiveShape two = adaptive_shape(2);
    CHECK(two.height == 1);
    CHECK(two.level_counts == std::vector<uint64_t>{1, 2});

    AdaptiveShape eight = adaptive_shape(8);
    CHECK(eight.height == 2);
    CHECK(eight.level_counts == std::vector<uint64_t>{1, 4, 8});

    AdaptiveShape big = adaptive_shape(64);
    CHECK(big.height == 3);
    CHECK(big.degree_at(0) == 8);
    CHECK(big.degree_at(1) == 4);
    CHECK(big.degree_at(2) == 2);
    CHECK(big.level_counts == std::vector<uint64_t>{1, 8, 32, 64});
    CHECK(big.node_count() == 105);

    // product of degrees along any root-to-leaf path is N
    uint64_t product = 1;
    for (uint32_t d = 0; d < big.height; ++d) product *= big.degree_at(d);
    CHECK(product == 64);
}

TEST_CASE("adaptive shape rejects non-triangular log2(N) naming neighbors") {
    try {
        adaptive_shape(16);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        std::string msg = e.what();
        CHECK(msg.find("N=8") != std::string::npos);
        CHECK(msg.find("N=64") != std::string::npos);
    }
    CHECK_THROWS_AS(adaptive_shape(3), InvalidArgument);
}

TEST_CASE("adaptive tree store: counts, leaf depth, level tiling") {
    Grid g = new_grid(8, 1, 4);  // N = 64
    Store store = build_adaptive_tree(g, kMac);
    CHECK(store.digests().size() == 105);

    // every level's ranges tile the 64 cells
    AdaptiveShape shape = adaptive_shape(64);
    size_t idx = 0;
    for (uint32_t d = 0; d <= shape.height; ++d) {
        uint64_t covered = 0;
        for (uint64_t i = 0; i < shape.level_counts[d]; ++i, ++idx)
            covered += descriptor_cell_count(store.digests()[idx].descriptor);
        CHECK(covered == 64);
    }
    CHECK(idx == store.digests().size());

    // leaves are single cells
    for (size_t i = store.digests().size() - 64; i < store.digests().size(); ++i)
        CHECK(descriptor_cell_count(store.digests()[i].descriptor) == 1);

    Grid big = new_grid(32, 1, 5);  // N = 1024, h = 4
    CHECK(build_adaptive_tree(big, kMac).digests().size() == 1681);

    Grid nonconf = new_grid(4, 1, 6);  // N = 16
    CHECK_THROWS_AS(build_adaptive_tree(nonconf, kMac), InvalidArgument);
}

TEST_CASE("dyadic line tree has 2L-1 digests and each level tiles the line") {
    Grid g = new_grid(16, 1, 7);
    auto tree = build_line_tree(g, kMac, LineId{LineAxis::Col, 8, 0, 16});
    CHECK(tree.size() == 31);
    size_t idx = 0;
    for (uint32_t len = 16; len >= 1; len /= 2) {
        std::vector<int> cover(16, 0);
        for (uint32_t i = 0; i < 16 / len; ++i, ++idx) {
            const auto* run = std::get_if<ColRunDesc>(&tree[idx].descriptor);
            REQUIRE(run != nullptr);
            CHECK(run->len == len);
            CHECK(run->col == 8);
            for (uint32_t j = 0; j < run->len; ++j) ++cover[run->row0 + j];
        }
        CHECK(std::all_of(cover.begin(), cover.end(), [](int v) { return v == 1; }));
    }
    CHECK(idx == tree.size());

    auto cells = build_line_cell_digests(g, kMac, LineId{LineAxis::Row, 3, 0, 16});
    CHECK(cells.size() == 16);
}

TEST_CASE("store files round-trip byte-identically") {
    Grid g = new_grid(8, 1, 8);
    const KeyMaterial sig = KeyMaterial::from_seed(KeyMode::Signature, 11);
    std::vector<Store> stores;
    stores.push_back(build_quad_store(g, kMac));
    stores.push_back(build_boundary_store(g, kMac));
    stores.push_back(build_sift_store(g, kMac));
    stores.push_back(build_layer_sieve(g, kMac));
    stores.push_back(build_adaptive_tree(g, kMac));
    stores.push_back(build_layer_sieve(g, sig));

    for (const Store& store : stores) {
        CAPTURE(store_variant_name(store.variant()));
        std::stringstream buf;
        save_store(store, buf);
        Store back = load_store(buf);
        CHECK(back.variant() == store.variant());
        CHECK(back.mode() == store.mode());
        CHECK(back.m() == store.m());
        CHECK(back.digests() == store.digests());

        std::stringstream again;
        save_store(back, again);
        std::stringstream direct;
        save_store(store, direct);
        CHECK(again.str() == direct.str());
    }
}

TEST_CASE("signature-mode stores verify straight from the file; mac stores need the key") {
    Grid g = new_grid(4, 1, 9);
    const KeyMaterial sig = KeyMaterial::from_seed(KeyMode::Signature, 12);

    std::stringstream sig_buf;
    save_store(build_layer_sieve(g, sig), sig_buf);
    Store sig_store = load_store(sig_buf);
    CHECK(sig_store.can_verify());
    CostMeter meter;
    CHECK(sig_store.verify(g, sig_store.digest_or_throw(RowRunDesc{0, 0, 4}), meter));

    std::stringstream mac_buf;
    save_store(build_layer_sieve(g, kMac), mac_buf);
    Store mac_store = load_store(mac_buf);
    CHECK_FALSE(mac_store.can_verify());
    CHECK_THROWS_AS(mac_store.require_matches(g), InvalidArgument);
    mac_store.attach_key(kMac);
    CHECK(mac_store.verify(g, mac_store.digest_or_throw(RowRunDesc{0, 0, 4}), meter));

    CHECK_THROWS_AS(mac_store.attach_key(sig), MismatchError);
}

TEST_CASE("store file error paths") {
    Grid g = new_grid(4, 1, 10);
    std::stringstream buf;
    save_store(build_quad_store(g, kMac), buf);
    std::string data = buf.str();

    SUBCASE("variant mismatch on typed load") {
        std::stringstream in(data);
        CHECK_THROWS_AS(load_store(in, StoreVariant::Sift), MismatchError);
        std::stringstream in2(data);
        CHECK_NOTHROW(load_store(in2, StoreVariant::Quad));
    }
    SUBCASE("bad magic") {
        std::string bad = data;
        bad[1] = '?';
        std::stringstream in(bad);
        CHECK_THROWS_AS(load_store(in), FormatError);
    }
    SUBCASE("unknown variant byte") {
        std::string bad = data;
        bad[4] = 9;  // variant field
        std::stringstream in(bad);
        CHECK_THROWS_AS(load_store(in), FormatError);
    }
    SUBCASE("truncation") {
        std::stringstream in(data.substr(0, data.size() - 10));
        CHECK_THROWS_AS(load_store(in), TruncationError);
    }
    SUBCASE("grid mismatch at use") {
        std::stringstream in(data);
        Store store = load_store(in);
        store.attach_key(kMac);
        Grid other = new_grid(8, 1, 0);
        CHECK_THROWS_AS(store.require_matches(other), MismatchError);
    }
}

TEST_CASE("store_size reports the digest count") {
    Grid g = new_grid(4, 1, 11);
    Store store = build_sift_store(g, kMac);
    CHECK(store_size(store) == 20);
}
